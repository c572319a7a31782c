#pragma once

#include <nlohmann/json.hpp>
#include <string>

#include "tryon/encoder.hpp"
#include "tryon/mdt.hpp"
#include "tryon/schedule.hpp"
#include "tryon/sre.hpp"

namespace tryon {

struct CodecConfig {
    uint64_t seed = 11;
    int f = 8;
    int c_lat = 4;
};

struct PipelineConfig {
    MdtConfig model;
    EncoderConfig encoder;
    CodecConfig codec;
    SreParams sre;
    double complexity_delta = 0.01;
    int t_train = 1000;
    double beta_min = 1e-4;
    double beta_max = 0.02;

    void validate() const {
        model.validate();
        encoder.validate();
        if (model.cond_tokens != 2 * encoder.tokens())
            throw std::invalid_argument("config: cond_tokens must equal 2x encoder tokens");
    }
};

struct TrainConfig {
    PipelineConfig pipe;
    std::string dataset_dir;
    std::string out_dir;
    double lr = 1e-4;
    double momentum = 0.9;
    std::string optimizer = "sgd";  // "sgd" | "adam"
    int batch = 8;
    int steps = 3000;
    double ema_rate = 0.9999;
    bool ema_warmup = true;  // effective rate min(rate, (1+step)/(10+step))
    uint64_t seed = 1;
    bool mask_objective = true;
    std::string mask_loss_form = "main";  // "main" (noise MSE) | "supp" (token MSE)
    double cond_dropout = 0.1;
    int threads = 0;  // 0 = hardware concurrency, capped at batch
    int ckpt_every = 1000;
    int log_every = 1;
};

// Partial-update JSON: only keys present in j are applied, so a config file
// and CLI overrides can be layered on the defaults.
void apply_json(MdtConfig& c, const nlohmann::json& j);
void apply_json(EncoderConfig& c, const nlohmann::json& j);
void apply_json(CodecConfig& c, const nlohmann::json& j);
void apply_json(SreParams& c, const nlohmann::json& j);
void apply_json(PipelineConfig& c, const nlohmann::json& j);
void apply_json(TrainConfig& c, const nlohmann::json& j);

nlohmann::json to_json(const MdtConfig& c);
nlohmann::json to_json(const EncoderConfig& c);
nlohmann::json to_json(const CodecConfig& c);
nlohmann::json to_json(const SreParams& c);
nlohmann::json to_json(const PipelineConfig& c);
nlohmann::json to_json(const TrainConfig& c);

}  // namespace tryon
