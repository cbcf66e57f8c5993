#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "dtr/config.hpp"
#include "dtr/denoiser.hpp"
#include "dtr/params.hpp"
#include "dtr/schedule.hpp"

namespace dtr {

struct MetricsRecord {
    int64_t step = 0;
    double loss = 0.0;
    std::optional<double> swd;
    int64_t wallclock_ms = 0;
};

std::string metrics_to_json(const MetricsRecord& r);

struct TrainResult {
    Denoiser model;        // final parameters
    TrainState state;
    MaskBank bank;
    NoiseSchedule sched;
    std::vector<MetricsRecord> metrics;
};

// Runs the training loop (uniform timestep per example, forward diffusion,
// routed noise prediction, weighted loss, Adam, EMA) and writes ckpt.bin and
// metrics.jsonl into out_dir (created if missing; pass "" to skip writing).
// Bit-deterministic given the config seed. Aborts on non-finite loss.
TrainResult train(const RunConfig& cfg, const std::string& out_dir);

// Per-run row of a variant comparison.
struct CompareRun {
    std::string variant;  // none | random | dtr
    uint64_t seed = 0;
    double swd = 0.0;
    int64_t params = 0;
    int64_t train_ms = 0;  // not serialized; kept for runtime checks
};

struct CompareSummary {
    std::vector<CompareRun> runs;
    std::map<std::string, double> median_swd;
};

// Trains every variant x seed with identical data/init/noise streams per
// seed, samples with the EMA weights, and scores samples against a held-out
// reference set. Writes summary.csv, summary.json, per-run checkpoints,
// metrics, and sample CSVs under out_dir.
CompareSummary compare_experiment(const RunConfig& base, const std::vector<std::string>& variants,
                                  const std::vector<uint64_t>& seeds, const std::string& out_dir);

// Number of generated/reference points used by compare_experiment.
constexpr int kCompareSampleCount = 4000;
constexpr int kCompareReferenceCount = 10000;
constexpr int kCompareProjections = 128;

void write_samples_csv(const MatRM& samples, const std::string& path);
MatRM read_samples_csv(const std::string& path);

}  // namespace dtr
