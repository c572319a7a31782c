#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tryon/grid.hpp"

namespace tryon {

struct MotifInfo {
    bool present = false;
    std::string kind;  // "checker" | "stripe"
    int x = 0, y = 0, w = 0, h = 0;  // bbox in garment-image pixels
};

// One paired try-on example. person equals agnostic exactly wherever mask=0;
// mask is the warped garment support (single connected region).
struct TryOnSample {
    Grid3 garment;   // 3xHxW
    Grid3 person;    // 3xHxW
    Grid3 agnostic;  // 3xHxW
    Grid3 pose;      // 3xHxW
    Grid3 mask;      // 1xHxW binary {0,1}
    int id = 0;
    MotifInfo motif;
    double warp_scale = 1.0;
    int warp_tx = 0, warp_ty = 0;
};

// Fully deterministic in (dataset_seed, sample_id).
TryOnSample gen_pair(uint64_t dataset_seed, int sample_id, int H, int W);

struct DatasetManifest {
    uint64_t seed = 0;
    int n = 0, h = 0, w = 0;
    struct Item {
        int id;
        std::string split;  // "train" | "val"
        MotifInfo motif;
        std::string garment, person, agnostic, pose, mask;  // paths relative to manifest dir
    };
    std::vector<Item> items;
};

// Writes n samples as PNGs plus manifest.json under out_dir. 90/10 split:
// ids congruent to 9 mod 10 are validation.
DatasetManifest gen_dataset(uint64_t dataset_seed, int n, const std::string& out_dir,
                            int H = 64, int W = 64);

DatasetManifest load_manifest(const std::string& dataset_dir);

inline std::string split_for_id(int id) { return id % 10 == 9 ? "val" : "train"; }

}  // namespace tryon
