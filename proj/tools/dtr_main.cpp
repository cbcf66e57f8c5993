#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "dtr/checkpoint.hpp"
#include "dtr/cka.hpp"
#include "dtr/config.hpp"
#include "dtr/datasets.hpp"
#include "dtr/errors.hpp"
#include "dtr/gradcheck.hpp"
#include "dtr/masks.hpp"
#include "dtr/rng.hpp"
#include "dtr/sampler.hpp"
#include "dtr/swd.hpp"
#include "dtr/text.hpp"
#include "dtr/train.hpp"

namespace {

using namespace dtr;

struct MaskGenArgs {
    int T = 1000, C = 64;
    std::string strategy = "dtr";
    double alpha = 4.0, beta = 0.8;
    uint64_t seed = 0;
    std::string out, pgm;
};

int run_mask_gen(const MaskGenArgs& a) {
    MaskSpec spec;
    spec.strategy = mask_strategy_from_string(a.strategy);
    spec.T = a.T;
    spec.C = a.C;
    spec.alpha = a.alpha;
    spec.beta = a.beta;
    spec.seed = a.seed;
    const MaskBank bank = make_bank(spec);
    if (!a.out.empty()) write_mask_csv(bank, a.out);
    if (!a.pgm.empty()) write_mask_pgm(bank, a.pgm);
    std::cout << "wrote " << spec.T << "x" << spec.C << " " << a.strategy
              << " bank (C_beta=" << spec.active_channels() << ")\n";
    return 0;
}

int run_mask_stats(const std::string& in, const std::string& overlap_pgm) {
    const MaskBank bank = read_mask_csv(in);
    const auto& spec = bank.spec;
    const int cb = spec.active_channels();
    std::cout << "T=" << spec.T << " C=" << spec.C << " strategy=" << to_string(spec.strategy)
              << " alpha=" << text::format_double(spec.alpha)
              << " beta=" << text::format_double(spec.beta) << " C_beta=" << cb << "\n";

    double sum = 0.0;
    long long pairs = 0;
    const int stride = spec.T > 256 ? spec.T / 256 : 1;
    for (int i = 0; i < spec.T; i += stride)
        for (int j = 0; j < spec.T; j += stride)
            if (i != j) {
                sum += shared_channels(bank, i, j);
                ++pairs;
            }
    if (pairs > 0)
        std::cout << "mean shared channels (distinct pairs, stride " << stride
                  << "): " << text::format_double(sum / double(pairs)) << "\n";
    std::cout << "random-mask expectation C_beta^2/C: "
              << text::format_double(expected_shared_channels(spec.C, cb)) << "\n";
    if (!overlap_pgm.empty()) {
        overlap_heatmap_export(bank, overlap_pgm);
        std::cout << "wrote overlap heatmap to " << overlap_pgm << "\n";
    }
    return 0;
}

int run_train(const std::string& config_path, const std::string& out_dir) {
    const RunConfig cfg = parse_config(config_path);
    const TrainResult result = train(cfg, out_dir);
    if (!result.metrics.empty())
        std::cout << "final loss " << text::format_double(result.metrics.back().loss) << " after "
                  << cfg.steps << " steps\n";
    std::cout << "checkpoint written to " << out_dir << "/ckpt.bin\n";
    return 0;
}

int run_sample(const std::string& ckpt_path, int n, int steps, uint64_t seed,
               const std::string& out, bool raw_weights) {
    const Checkpoint ckpt = read_checkpoint(ckpt_path);
    Denoiser model = build_denoiser(ckpt.model_cfg, 0);
    model = with_params(model, raw_weights ? ckpt.params : ckpt.ema);
    const MaskBank bank = make_bank(ckpt.mask_spec);
    const NoiseSchedule sched = cosine_schedule(ckpt.mask_spec.T);
    const MatRM samples = ancestral_sample(model, &bank, sched, steps, n, seed);
    write_samples_csv(samples, out);
    std::cout << "wrote " << n << " samples to " << out << "\n";
    return 0;
}

int run_gradcheck(int width, int blocks, const std::string& variant, int temb, int data_dim,
                  int batch, uint64_t seed) {
    DenoiserConfig cfg;
    cfg.width = width;
    cfg.n_blocks = blocks;
    cfg.routing_variant = routing_variant_from_string(variant);
    cfg.temb_dim = temb;
    cfg.data_dim = data_dim;
    const GradCheckReport report = gradient_check(cfg, batch, seed);
    std::printf("max relative error %.3e over %lld parameters\n", report.max_rel_error,
                (long long)report.n_params);
    if (report.max_rel_error < 1e-6) {
        std::cout << "gradcheck passed\n";
        return 0;
    }
    std::cout << "gradcheck FAILED (threshold 1e-6)\n";
    return 1;
}

int run_cka(const std::string& config_path, const std::string& ckpt_path,
            const std::string& out_dir, int block, int probes, int batch, uint64_t seed) {
    const RunConfig cfg = parse_config(config_path);
    const Checkpoint ckpt = read_checkpoint(ckpt_path);
    Denoiser model = build_denoiser(ckpt.model_cfg, 0);
    model = with_params(model, ckpt.ema);
    const MaskBank bank = make_bank(ckpt.mask_spec);
    const NoiseSchedule sched = cosine_schedule(ckpt.mask_spec.T);
    const MatRM x0 = gen_dataset(cfg.dataset, batch, rng::derive_seed(seed, "cka-data"));
    const auto timesteps = default_probe_timesteps(ckpt.mask_spec.T, probes);

    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) throw io_error("cannot create directory '" + out_dir + "'");

    const int lo = block < 0 ? 0 : block;
    const int hi = block < 0 ? ckpt.model_cfg.n_blocks - 1 : block;
    for (int l = lo; l <= hi; ++l) {
        const CKAMatrix m = cka_timestep_matrix(model, &bank, sched, x0, timesteps, l, seed);
        const auto path =
            (std::filesystem::path(out_dir) / ("cka_block" + std::to_string(l) + ".csv")).string();
        write_cka_csv(m, path);
        std::cout << "wrote " << path << "\n";
    }
    return 0;
}

int run_compare(const std::string& config_path, const std::string& seeds_arg,
                const std::string& out_dir) {
    const RunConfig base = parse_config(config_path);
    std::vector<uint64_t> seeds;
    for (const auto& tok : text::split(seeds_arg, ','))
        seeds.push_back(text::parse_uint(text::trim(tok)));
    const CompareSummary summary =
        compare_experiment(base, {"none", "random", "dtr"}, seeds, out_dir);
    for (const auto& [variant, median] : summary.median_swd)
        std::cout << "median swd " << variant << ": " << text::format_double(median) << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"denoising task routing toolkit"};
    app.require_subcommand(1);

    // mask gen / mask stats
    auto* mask = app.add_subcommand("mask", "generate and inspect routing mask banks");
    mask->require_subcommand(1);

    MaskGenArgs mg;
    auto* mask_gen = mask->add_subcommand("gen", "generate a mask bank");
    mask_gen->add_option("--T", mg.T, "number of denoising tasks");
    mask_gen->add_option("--C", mg.C, "channel count");
    mask_gen->add_option("--strategy", mg.strategy, "full|random|dtr");
    mask_gen->add_option("--alpha", mg.alpha, "window-shift exponent");
    mask_gen->add_option("--beta", mg.beta, "activation ratio");
    mask_gen->add_option("--seed", mg.seed, "seed (random strategy)");
    mask_gen->add_option("--out", mg.out, "output CSV path")->required();
    mask_gen->add_option("--pgm", mg.pgm, "optional heatmap PGM path");

    std::string ms_in, ms_overlap_pgm;
    auto* mask_stats = mask->add_subcommand("stats", "summarize a mask bank CSV");
    mask_stats->add_option("--in", ms_in, "bank CSV path")->required();
    mask_stats->add_option("--overlap-pgm", ms_overlap_pgm, "write overlap heatmap PGM");

    std::string tr_config, tr_out;
    auto* train_cmd = app.add_subcommand("train", "train a model from a config file");
    train_cmd->add_option("--config", tr_config, "config file")->required();
    train_cmd->add_option("--out", tr_out, "output directory")->required();

    std::string sp_ckpt, sp_out;
    int sp_n = 1000, sp_steps = 250;
    uint64_t sp_seed = 0;
    bool sp_raw = false;
    auto* sample_cmd = app.add_subcommand("sample", "draw samples from a checkpoint");
    sample_cmd->add_option("--ckpt", sp_ckpt, "checkpoint path")->required();
    sample_cmd->add_option("--n", sp_n, "number of samples");
    sample_cmd->add_option("--steps", sp_steps, "sampling steps");
    sample_cmd->add_option("--seed", sp_seed, "sampler seed");
    sample_cmd->add_option("--out", sp_out, "output CSV")->required();
    sample_cmd->add_flag("--raw", sp_raw, "use raw weights instead of the EMA shadow");

    std::string ev_samples, ev_reference;
    int ev_proj = 128;
    uint64_t ev_seed = 0;
    auto* eval_cmd = app.add_subcommand("eval", "sliced Wasserstein distance between sample CSVs");
    eval_cmd->add_option("--samples", ev_samples, "generated samples CSV")->required();
    eval_cmd->add_option("--reference", ev_reference, "reference samples CSV")->required();
    eval_cmd->add_option("--projections", ev_proj, "number of random projections");
    eval_cmd->add_option("--seed", ev_seed, "projection seed");

    std::string ck_config, ck_ckpt, ck_out;
    int ck_block = -1, ck_probes = 16, ck_batch = 256;
    uint64_t ck_seed = 0;
    auto* cka_cmd = app.add_subcommand("cka", "timestep similarity matrices per block");
    cka_cmd->add_option("--config", ck_config, "config file (for the probe dataset)")->required();
    cka_cmd->add_option("--ckpt", ck_ckpt, "checkpoint path")->required();
    cka_cmd->add_option("--out-dir", ck_out, "output directory")->required();
    cka_cmd->add_option("--block", ck_block, "block index, -1 for all");
    cka_cmd->add_option("--probes", ck_probes, "number of probed timesteps");
    cka_cmd->add_option("--batch", ck_batch, "probe batch size");
    cka_cmd->add_option("--seed", ck_seed, "probe seed");

    int gc_width = 8, gc_blocks = 2, gc_temb = 16, gc_data_dim = 2, gc_batch = 4;
    std::string gc_variant = "adm_style";
    uint64_t gc_seed = 0;
    auto* gc_cmd = app.add_subcommand("gradcheck", "finite-difference gradient verification");
    gc_cmd->add_option("--width", gc_width, "hidden width");
    gc_cmd->add_option("--blocks", gc_blocks, "number of blocks");
    gc_cmd->add_option("--variant", gc_variant, "none|adm_style|dit_style");
    gc_cmd->add_option("--temb", gc_temb, "timestep embedding dim");
    gc_cmd->add_option("--data-dim", gc_data_dim, "data dimension");
    gc_cmd->add_option("--batch", gc_batch, "batch size");
    gc_cmd->add_option("--seed", gc_seed, "seed");

    std::string cp_config, cp_seeds = "1,2,3", cp_out;
    auto* compare_cmd = app.add_subcommand("compare", "train none/random/dtr arms and score them");
    compare_cmd->add_option("--config", cp_config, "base config file")->required();
    compare_cmd->add_option("--seeds", cp_seeds, "comma-separated master seeds (>= 3)");
    compare_cmd->add_option("--out", cp_out, "output directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    try {
        if (mask_gen->parsed()) return run_mask_gen(mg);
        if (mask_stats->parsed()) return run_mask_stats(ms_in, ms_overlap_pgm);
        if (train_cmd->parsed()) return run_train(tr_config, tr_out);
        if (sample_cmd->parsed()) return run_sample(sp_ckpt, sp_n, sp_steps, sp_seed, sp_out, sp_raw);
        if (eval_cmd->parsed()) {
            const dtr::MatRM samples = dtr::read_samples_csv(ev_samples);
            const dtr::MatRM reference = dtr::read_samples_csv(ev_reference);
            const double swd = dtr::evaluate_swd(samples, reference, ev_proj, ev_seed);
            std::cout << "swd " << dtr::text::format_double(swd) << "\n";
            return 0;
        }
        if (cka_cmd->parsed())
            return run_cka(ck_config, ck_ckpt, ck_out, ck_block, ck_probes, ck_batch, ck_seed);
        if (gc_cmd->parsed())
            return run_gradcheck(gc_width, gc_blocks, gc_variant, gc_temb, gc_data_dim, gc_batch,
                                 gc_seed);
        if (compare_cmd->parsed()) return run_compare(cp_config, cp_seeds, cp_out);
    } catch (const dtr::io_error& e) {
        std::cerr << "io error: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::out_of_range& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
