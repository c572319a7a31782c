#include "tryon/synth.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "tryon/image_io.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace tryon {

namespace {

void fill_rect(Grid3& img, int x0, int y0, int w, int h, const float rgb[3]) {
    for (int ch = 0; ch < 3; ++ch)
        for (int y = y0; y < y0 + h; ++y)
            for (int x = x0; x < x0 + w; ++x) img.at(ch, y, x) = rgb[ch];
}

void fill_ellipse(Grid3& img, double cx, double cy, double rx, double ry, const float rgb[3]) {
    for (int y = 0; y < img.h; ++y)
        for (int x = 0; x < img.w; ++x) {
            double dx = (x - cx) / rx, dy = (y - cy) / ry;
            if (dx * dx + dy * dy <= 1.0)
                for (int ch = 0; ch < 3; ++ch) img.at(ch, y, x) = rgb[ch];
        }
}

bool in_ellipse(int x, int y, double cx, double cy, double rx, double ry) {
    double dx = (x - cx) / rx, dy = (y - cy) / ry;
    return dx * dx + dy * dy <= 1.0;
}

}  // namespace

TryOnSample gen_pair(uint64_t dataset_seed, int sample_id, int H, int W) {
    Rng rng(mix_seed(dataset_seed, uint64_t(sample_id)));
    TryOnSample s;
    s.id = sample_id;

    // --- garment: solid rectangle on a light background --------------------
    float bg[3], base[3];
    for (int ch = 0; ch < 3; ++ch) bg[ch] = static_cast<float>(rng.uniform(0.88, 0.97));
    for (int ch = 0; ch < 3; ++ch) base[ch] = static_cast<float>(rng.uniform(0.08, 0.92));

    // area fraction in [0.21, 0.46]; stays inside [0.10, 0.50] after the
    // 0.75x warp and rounding
    int gw = static_cast<int>(std::lround(W * rng.uniform(0.48, 0.70)));
    int gh = static_cast<int>(std::lround(H * rng.uniform(0.44, 0.66)));
    int gx = (W - gw) / 2 + rng.uniform_int(std::max(1, W / 16)) - W / 32;
    int gy = (H - gh) / 2 + rng.uniform_int(std::max(1, H / 16)) - H / 32;
    gx = clamp(gx, 1, W - gw - 1);
    gy = clamp(gy, 1, H - gh - 1);

    s.garment = Grid3(3, H, W);
    fill_rect(s.garment, 0, 0, W, H, bg);
    fill_rect(s.garment, gx, gy, gw, gh, base);

    // --- optional high-frequency motif -------------------------------------
    // 70% of samples carry one; the rest exercise the no-salient-target path.
    if (rng.bernoulli(0.7)) {
        s.motif.present = true;
        s.motif.kind = rng.bernoulli(0.5) ? "checker" : "stripe";
        int ms = clamp(static_cast<int>(std::lround(std::min(gw, gh) * rng.uniform(0.35, 0.55))), 6,
                       std::min(gw, gh) - 4);
        int mx = gx + 2 + rng.uniform_int(std::max(1, gw - ms - 4));
        int my = gy + 2 + rng.uniform_int(std::max(1, gh - ms - 4));
        s.motif.x = mx;
        s.motif.y = my;
        s.motif.w = ms;
        s.motif.h = ms;
        float c1[3], c2[3];
        for (int ch = 0; ch < 3; ++ch) {
            c1[ch] = clamp(1.0f - base[ch] + static_cast<float>(rng.uniform(-0.1, 0.1)), 0.0f, 1.0f);
            c2[ch] = static_cast<float>(rng.uniform(0.1, 0.9));
        }
        for (int y = my; y < my + ms; ++y)
            for (int x = mx; x < mx + ms; ++x) {
                bool first = s.motif.kind == "checker" ? (((x - mx) / 2 + (y - my) / 2) % 2 == 0)
                                                       : (((x - mx) / 2) % 2 == 0);
                const float* c = first ? c1 : c2;
                // per-pixel jitter keeps neighborhood intensities diverse so
                // the motif dominates the entropy map
                for (int ch = 0; ch < 3; ++ch) {
                    float jit = static_cast<float>(rng.uniform(-0.10, 0.10));
                    s.garment.at(ch, y, x) = clamp(c[ch] + jit, 0.0f, 1.0f);
                }
            }
    }

    // --- person: warped garment over a torso silhouette --------------------
    s.warp_scale = rng.bernoulli(0.5) ? 1.0 : 0.75;
    int ww = s.warp_scale == 1.0 ? gw : ceil_div(gw * 3, 4);
    int wh = s.warp_scale == 1.0 ? gh : ceil_div(gh * 3, 4);

    float pbg[3], skin[3];
    for (int ch = 0; ch < 3; ++ch) pbg[ch] = static_cast<float>(rng.uniform(0.15, 0.45));
    skin[0] = static_cast<float>(rng.uniform(0.60, 0.85));
    skin[1] = static_cast<float>(rng.uniform(0.45, 0.70));
    skin[2] = static_cast<float>(rng.uniform(0.35, 0.60));

    double torso_cx = W * 0.5, torso_cy = H * 0.60, torso_rx = W * 0.32, torso_ry = H * 0.38;
    double head_cy = H * 0.14, head_r = H * 0.10;

    s.person = Grid3(3, H, W);
    fill_rect(s.person, 0, 0, W, H, pbg);
    fill_ellipse(s.person, torso_cx, head_cy, head_r, head_r, skin);
    fill_ellipse(s.person, torso_cx, torso_cy, torso_rx, torso_ry, skin);

    int tx = (W - ww) / 2 + rng.uniform_int(std::max(1, W / 10)) - W / 20;
    int ty = static_cast<int>(std::lround(H * 0.28)) + rng.uniform_int(std::max(1, H / 12)) - H / 24;
    tx = clamp(tx, 1, W - ww - 1);
    ty = clamp(ty, 1, H - wh - 1);
    s.warp_tx = tx;
    s.warp_ty = ty;

    s.mask = Grid3(1, H, W, 0.0f);
    for (int y = 0; y < wh; ++y) {
        // nearest-source subsample: dst index k reads src index floor(4k/3)
        // when scale is 0.75, identity otherwise
        int sy = s.warp_scale == 1.0 ? y : (4 * y) / 3;
        for (int x = 0; x < ww; ++x) {
            int sx = s.warp_scale == 1.0 ? x : (4 * x) / 3;
            for (int ch = 0; ch < 3; ++ch)
                s.person.at(ch, ty + y, tx + x) = s.garment.at(ch, gy + sy, gx + sx);
            s.mask.at(0, ty + y, tx + x) = 1.0f;
        }
    }

    // --- agnostic: person with the garment region neutralized --------------
    s.agnostic = s.person;
    for (int y = 0; y < H; ++y)
        for (int x = 0; x < W; ++x)
            if (s.mask.at(0, y, x) > 0.5f)
                for (int ch = 0; ch < 3; ++ch) s.agnostic.at(ch, y, x) = 0.5f;

    // --- pose surrogate: silhouette filled with a vertical 2-color gradient -
    float pc1[3], pc2[3];
    for (int ch = 0; ch < 3; ++ch) {
        pc1[ch] = static_cast<float>(rng.uniform(0.2, 1.0));
        pc2[ch] = static_cast<float>(rng.uniform(0.0, 0.8));
    }
    s.pose = Grid3(3, H, W, 0.0f);
    for (int y = 0; y < H; ++y) {
        float t = static_cast<float>(y) / (H - 1);
        for (int x = 0; x < W; ++x) {
            bool inside = in_ellipse(x, y, torso_cx, torso_cy, torso_rx, torso_ry) ||
                          in_ellipse(x, y, torso_cx, head_cy, head_r, head_r);
            if (inside)
                for (int ch = 0; ch < 3; ++ch)
                    s.pose.at(ch, y, x) = (1.0f - t) * pc1[ch] + t * pc2[ch];
        }
    }

    return s;
}

DatasetManifest gen_dataset(uint64_t dataset_seed, int n, const std::string& out_dir, int H, int W) {
    if (n < 1) throw std::invalid_argument("gen_dataset: n must be >= 1");
    std::error_code ec;
    fs::create_directories(fs::path(out_dir) / "samples", ec);
    if (ec) throw std::runtime_error("gen_dataset: cannot create " + out_dir + ": " + ec.message());

    DatasetManifest m;
    m.seed = dataset_seed;
    m.n = n;
    m.h = H;
    m.w = W;
    json items = json::array();
    for (int id = 0; id < n; ++id) {
        TryOnSample s = gen_pair(dataset_seed, id, H, W);
        char buf[16];
        std::snprintf(buf, sizeof(buf), "%05d", id);
        std::string rel = std::string("samples/") + buf;
        fs::create_directories(fs::path(out_dir) / rel, ec);
        if (ec) throw std::runtime_error("gen_dataset: cannot create sample dir: " + ec.message());

        DatasetManifest::Item it;
        it.id = id;
        it.split = split_for_id(id);
        it.motif = s.motif;
        it.garment = rel + "/garment.png";
        it.person = rel + "/person.png";
        it.agnostic = rel + "/agnostic.png";
        it.pose = rel + "/pose.png";
        it.mask = rel + "/mask.png";
        write_png(out_dir + "/" + it.garment, s.garment);
        write_png(out_dir + "/" + it.person, s.person);
        write_png(out_dir + "/" + it.agnostic, s.agnostic);
        write_png(out_dir + "/" + it.pose, s.pose);
        write_png(out_dir + "/" + it.mask, s.mask);

        json motif = {{"present", s.motif.present}};
        if (s.motif.present) {
            motif["kind"] = s.motif.kind;
            motif["x"] = s.motif.x;
            motif["y"] = s.motif.y;
            motif["w"] = s.motif.w;
            motif["h"] = s.motif.h;
        }
        items.push_back({{"id", id},
                         {"split", it.split},
                         {"motif", motif},
                         {"paths",
                          {{"garment", it.garment},
                           {"person", it.person},
                           {"agnostic", it.agnostic},
                           {"pose", it.pose},
                           {"mask", it.mask}}}});
        m.items.push_back(std::move(it));
    }

    json manifest = {{"schema", "tryon-dataset/1"},
                     {"seed", dataset_seed},
                     {"n", n},
                     {"height", H},
                     {"width", W},
                     {"items", items}};
    std::ofstream out(out_dir + "/manifest.json");
    if (!out) throw std::runtime_error("gen_dataset: cannot write manifest in " + out_dir);
    out << manifest.dump(2) << "\n";
    return m;
}

DatasetManifest load_manifest(const std::string& dataset_dir) {
    std::ifstream in(dataset_dir + "/manifest.json");
    if (!in) throw std::runtime_error("load_manifest: missing " + dataset_dir + "/manifest.json");
    json j = json::parse(in);
    DatasetManifest m;
    m.seed = j.at("seed").get<uint64_t>();
    m.n = j.at("n").get<int>();
    m.h = j.at("height").get<int>();
    m.w = j.at("width").get<int>();
    for (const auto& item : j.at("items")) {
        DatasetManifest::Item it;
        it.id = item.at("id").get<int>();
        it.split = item.at("split").get<std::string>();
        const auto& motif = item.at("motif");
        it.motif.present = motif.at("present").get<bool>();
        if (it.motif.present) {
            it.motif.kind = motif.at("kind").get<std::string>();
            it.motif.x = motif.at("x").get<int>();
            it.motif.y = motif.at("y").get<int>();
            it.motif.w = motif.at("w").get<int>();
            it.motif.h = motif.at("h").get<int>();
        }
        const auto& paths = item.at("paths");
        it.garment = paths.at("garment").get<std::string>();
        it.person = paths.at("person").get<std::string>();
        it.agnostic = paths.at("agnostic").get<std::string>();
        it.pose = paths.at("pose").get<std::string>();
        it.mask = paths.at("mask").get<std::string>();
        m.items.push_back(std::move(it));
    }
    return m;
}

}  // namespace tryon
