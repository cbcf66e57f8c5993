#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dtr/denoiser.hpp"
#include "dtr/masks.hpp"
#include "dtr/schedule.hpp"

namespace dtr {

struct WeightSpec {
    WeightScheme scheme = WeightScheme::uniform;
    std::string table_file;          // CSV/lines of T reals, scheme = table only
    std::vector<double> table;       // loaded lazily by the trainer
};

// One training run. Parsed from flat "key = value" lines with '#' comments
// and dotted keys; missing keys take the defaults below, unknown keys are
// errors.
struct RunConfig {
    std::string dataset = "gauss8";
    int n_train = 10000;
    int T = 1000;
    int steps = 5000;
    int batch = 128;
    double lr = 1e-4;
    double ema_decay = 0.9999;
    MaskSpec mask;                   // strategy dtr, alpha 4, beta 0.8
    DenoiserConfig model;            // width 64, 4 blocks, adm_style
    uint64_t seed = 0;
    int sample_steps = 250;
    WeightSpec weight;

    void validate() const;

    // The mask spec aligned with the run: T from the schedule, C from the
    // model width.
    MaskSpec bank_spec() const;
};

RunConfig default_config();  // model.routing_variant = adm_style
RunConfig parse_config(const std::string& path);
RunConfig parse_config_text(const std::string& text);
std::string serialize_config(const RunConfig& cfg);

}  // namespace dtr
