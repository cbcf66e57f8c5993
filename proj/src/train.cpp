#include "dtr/train.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "dtr/checkpoint.hpp"
#include "dtr/datasets.hpp"
#include "dtr/errors.hpp"
#include "dtr/rng.hpp"
#include "dtr/sampler.hpp"
#include "dtr/swd.hpp"
#include "dtr/text.hpp"

#include <json.hpp>

namespace dtr {

namespace {

int64_t now_ms() {
    using namespace std::chrono;
    return duration_cast<milliseconds>(steady_clock::now().time_since_epoch()).count();
}

std::vector<double> load_weight_table(const std::string& path, int T) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw io_error("cannot open weight table '" + path + "'");
    std::vector<double> table;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto trimmed = text::trim(line);
        if (trimmed.empty()) continue;
        table.push_back(text::parse_double(trimmed));
        if (table.back() < 0.0)
            throw std::invalid_argument("weight table line " + std::to_string(line_no) +
                                        ": weights must be >= 0");
    }
    if (int(table.size()) != T)
        throw std::invalid_argument("weight table has " + std::to_string(table.size()) +
                                    " entries, expected T = " + std::to_string(T));
    return table;
}

void ensure_dir(const std::string& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw io_error("cannot create directory '" + dir + "': " + ec.message());
}

}  // namespace

std::string metrics_to_json(const MetricsRecord& r) {
    std::ostringstream out;
    out << "{\"step\":" << r.step << ",\"loss\":" << text::format_double(r.loss) << ",\"swd\":";
    if (r.swd)
        out << text::format_double(*r.swd);
    else
        out << "null";
    out << ",\"wallclock_ms\":" << r.wallclock_ms << "}";
    return out.str();
}

TrainResult train(const RunConfig& cfg, const std::string& out_dir) {
    cfg.validate();
    const uint64_t seed = cfg.seed;

    std::vector<double> weight_table = cfg.weight.table;
    if (cfg.weight.scheme == WeightScheme::table && weight_table.empty())
        weight_table = load_weight_table(cfg.weight.table_file, cfg.T);

    TrainResult result;
    result.sched = cosine_schedule(cfg.T);
    result.bank = make_bank(cfg.bank_spec());
    result.model = build_denoiser(cfg.model, seed);
    TrainState state = make_train_state(result.model.params);

    const MatRM data = gen_dataset(cfg.dataset, cfg.n_train, rng::derive_seed(seed, "data"));

    AdamConfig adam;
    adam.lr = cfg.lr;

    auto eng = rng::make_engine(seed, "train");
    const int b = cfg.batch;
    const int d = cfg.model.data_dim;
    MatRM x0(b, d), eps(b, d);
    std::vector<int> t(static_cast<size_t>(b));
    VecX weights(b);

    const int64_t start_ms = now_ms();
    const MaskBank* bank = &result.bank;
    for (int step = 0; step < cfg.steps; ++step) {
        for (int i = 0; i < b; ++i) {
            const auto row = rng::uniform_below(eng, uint64_t(cfg.n_train));
            x0.row(i) = data.row(Eigen::Index(row));
            t[size_t(i)] = 1 + int(rng::uniform_below(eng, uint64_t(cfg.T)));
            for (int j = 0; j < d; ++j) eps(i, j) = rng::normal(eng);
            weights[i] = loss_weight(t[size_t(i)], cfg.weight.scheme, weight_table);
        }
        const MatRM xt = q_sample_batch(x0, t, eps, result.sched);
        Denoiser current = with_params(result.model, state.params);
        BackwardResult back = backward(current, xt, t, bank, eps, weights);
        if (!std::isfinite(back.loss))
            throw std::runtime_error("training aborted: non-finite loss " +
                                     text::format_double(back.loss) + " at step " +
                                     std::to_string(step));
        if (step % 100 == 0 || step == cfg.steps - 1)
            result.metrics.push_back({step, back.loss, std::nullopt, now_ms() - start_ms});
        adam_step(state, back.grads, adam);
        ema_update(state, cfg.ema_decay);
    }

    result.model.params = state.params;
    result.state = std::move(state);

    if (!out_dir.empty()) {
        ensure_dir(out_dir);
        Checkpoint ckpt;
        ckpt.model_cfg = cfg.model;
        ckpt.mask_spec = result.bank.spec;
        ckpt.step = result.state.step;
        ckpt.params = result.state.params;
        ckpt.ema = result.state.ema;
        write_checkpoint(ckpt, (std::filesystem::path(out_dir) / "ckpt.bin").string());

        std::ofstream metrics_out(std::filesystem::path(out_dir) / "metrics.jsonl",
                                  std::ios::binary);
        if (!metrics_out) throw io_error("cannot write metrics in '" + out_dir + "'");
        for (const auto& r : result.metrics) metrics_out << metrics_to_json(r) << '\n';
    }
    return result;
}

void write_samples_csv(const MatRM& samples, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw io_error("cannot open '" + path + "' for writing");
    for (Eigen::Index i = 0; i < samples.rows(); ++i) {
        for (Eigen::Index j = 0; j < samples.cols(); ++j) {
            if (j) out << ',';
            out << text::format_double(samples(i, j));
        }
        out << '\n';
    }
    if (!out) throw io_error("write failed for '" + path + "'");
}

MatRM read_samples_csv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw io_error("cannot open '" + path + "' for reading");
    std::vector<std::vector<double>> rows;
    std::string line;
    while (std::getline(in, line)) {
        const auto trimmed = text::trim(line);
        if (trimmed.empty()) continue;
        std::vector<double> row;
        for (const auto& cell : text::split(trimmed, ',')) row.push_back(text::parse_double(cell));
        if (!rows.empty() && rows.back().size() != row.size())
            throw std::invalid_argument("samples csv: ragged rows in '" + path + "'");
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw std::invalid_argument("samples csv: no rows in '" + path + "'");
    MatRM out(Eigen::Index(rows.size()), Eigen::Index(rows[0].size()));
    for (size_t i = 0; i < rows.size(); ++i)
        for (size_t j = 0; j < rows[i].size(); ++j) out(Eigen::Index(i), Eigen::Index(j)) = rows[i][j];
    return out;
}

CompareSummary compare_experiment(const RunConfig& base, const std::vector<std::string>& variants,
                                  const std::vector<uint64_t>& seeds, const std::string& out_dir) {
    base.validate();
    if (seeds.size() < 3) throw std::invalid_argument("compare: need at least 3 seeds");
    for (const auto& v : variants)
        if (v != "none" && v != "random" && v != "dtr")
            throw std::invalid_argument("compare: unknown variant '" + v + "'");
    ensure_dir(out_dir);

    CompareSummary summary;
    for (uint64_t seed : seeds) {
        const MatRM reference = gen_dataset(base.dataset, kCompareReferenceCount,
                                            rng::derive_seed(seed, "reference"));
        for (const auto& variant : variants) {
            RunConfig cfg = base;
            cfg.seed = seed;
            if (variant == "none") cfg.mask.strategy = MaskStrategy::full;
            else if (variant == "random") cfg.mask.strategy = MaskStrategy::random;
            else cfg.mask.strategy = MaskStrategy::dtr;
            cfg.mask.seed = seed;  // random banks vary with the run seed

            const auto run_dir =
                (std::filesystem::path(out_dir) / (variant + "_s" + std::to_string(seed))).string();
            const int64_t t0 = now_ms();
            TrainResult run = train(cfg, run_dir);
            const int64_t train_ms = now_ms() - t0;

            Denoiser ema_model = with_params(run.model, run.state.ema);
            const MatRM samples =
                ancestral_sample(ema_model, &run.bank, run.sched, cfg.sample_steps,
                                 kCompareSampleCount, rng::derive_seed(seed, "sampler"));
            write_samples_csv(samples,
                              (std::filesystem::path(run_dir) / "samples.csv").string());
            const double swd = evaluate_swd(samples, reference, kCompareProjections,
                                            rng::derive_seed(seed, "projections"));
            summary.runs.push_back(
                {variant, seed, swd, parameter_count(cfg.model), train_ms});
        }
    }

    for (const auto& variant : variants) {
        std::vector<double> values;
        for (const auto& run : summary.runs)
            if (run.variant == variant) values.push_back(run.swd);
        std::sort(values.begin(), values.end());
        const size_t n = values.size();
        summary.median_swd[variant] =
            n % 2 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
    }

    std::ofstream csv(std::filesystem::path(out_dir) / "summary.csv", std::ios::binary);
    if (!csv) throw io_error("cannot write summary.csv in '" + out_dir + "'");
    csv << "variant,seed,swd,params\n";
    for (const auto& run : summary.runs)
        csv << run.variant << ',' << run.seed << ',' << text::format_double(run.swd) << ','
            << run.params << '\n';

    nlohmann::json j;
    for (const auto& [variant, median] : summary.median_swd) j["median_swd"][variant] = median;
    for (const auto& run : summary.runs)
        j["runs"].push_back({{"variant", run.variant},
                             {"seed", run.seed},
                             {"swd", run.swd},
                             {"params", run.params}});
    std::ofstream json_out(std::filesystem::path(out_dir) / "summary.json", std::ios::binary);
    if (!json_out) throw io_error("cannot write summary.json in '" + out_dir + "'");
    json_out << j.dump(2) << '\n';

    return summary;
}

}  // namespace dtr
