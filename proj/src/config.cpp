#include "dtr/config.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include "dtr/datasets.hpp"
#include "dtr/errors.hpp"
#include "dtr/text.hpp"

namespace dtr {

RunConfig default_config() {
    RunConfig cfg;
    cfg.mask.strategy = MaskStrategy::dtr;
    cfg.mask.alpha = 4.0;
    cfg.mask.beta = 0.8;
    cfg.mask.seed = 0;
    cfg.model.data_dim = 2;
    cfg.model.width = 64;
    cfg.model.n_blocks = 4;
    cfg.model.temb_dim = 64;
    cfg.model.routing_variant = RoutingVariant::adm_style;
    return cfg;
}

void RunConfig::validate() const {
    if (!is_dataset_name(dataset)) throw std::invalid_argument("config: unknown dataset '" + dataset + "'");
    if (n_train < 1) throw std::invalid_argument("config: n_train must be >= 1");
    if (T < 1) throw std::invalid_argument("config: T must be >= 1");
    if (steps < 0) throw std::invalid_argument("config: steps must be >= 0");
    if (batch < 1) throw std::invalid_argument("config: batch must be >= 1");
    if (!(lr > 0.0)) throw std::invalid_argument("config: lr must be > 0");
    if (!(ema_decay >= 0.0 && ema_decay < 1.0))
        throw std::invalid_argument("config: ema_decay must be in [0, 1)");
    if (sample_steps < 1 || sample_steps > T)
        throw std::invalid_argument("config: sample_steps must be in [1, T]");
    if (weight.scheme == WeightScheme::table && weight.table_file.empty() && weight.table.empty())
        throw std::invalid_argument("config: weight.scheme = table requires weight.table_file");
    model.validate();
    bank_spec().validate();
}

MaskSpec RunConfig::bank_spec() const {
    MaskSpec spec = mask;
    spec.T = T;
    spec.C = model.width;
    return spec;
}

namespace {

struct KeyValue {
    std::string key;
    std::string value;
    int line;
};

[[noreturn]] void fail_at(int line, const std::string& message) {
    throw std::invalid_argument("config line " + std::to_string(line) + ": " + message);
}

void apply(RunConfig& cfg, const KeyValue& kv) {
    const auto& k = kv.key;
    const auto& v = kv.value;
    auto as_int = [&](int lo) {
        long long n;
        try {
            n = text::parse_int(v);
        } catch (const std::exception&) {
            fail_at(kv.line, "key '" + k + "' expects an integer, got '" + v + "'");
        }
        if (n < lo) fail_at(kv.line, "key '" + k + "' must be >= " + std::to_string(lo));
        return int(n);
    };
    auto as_double = [&] {
        try {
            return text::parse_double(v);
        } catch (const std::exception&) {
            fail_at(kv.line, "key '" + k + "' expects a real number, got '" + v + "'");
        }
    };
    auto as_uint = [&] {
        try {
            return uint64_t(text::parse_uint(v));
        } catch (const std::exception&) {
            fail_at(kv.line, "key '" + k + "' expects an unsigned integer, got '" + v + "'");
        }
    };

    if (k == "dataset") cfg.dataset = v;
    else if (k == "n_train") cfg.n_train = as_int(1);
    else if (k == "T") cfg.T = as_int(1);
    else if (k == "steps") cfg.steps = as_int(0);
    else if (k == "batch") cfg.batch = as_int(1);
    else if (k == "lr") cfg.lr = as_double();
    else if (k == "ema_decay") cfg.ema_decay = as_double();
    else if (k == "seed") cfg.seed = as_uint();
    else if (k == "sample_steps") cfg.sample_steps = as_int(1);
    else if (k == "mask.strategy") {
        try {
            cfg.mask.strategy = mask_strategy_from_string(v);
        } catch (const std::exception& e) {
            fail_at(kv.line, e.what());
        }
    } else if (k == "mask.alpha") cfg.mask.alpha = as_double();
    else if (k == "mask.beta") cfg.mask.beta = as_double();
    else if (k == "mask.seed") cfg.mask.seed = as_uint();
    else if (k == "model.variant") {
        try {
            cfg.model.routing_variant = routing_variant_from_string(v);
        } catch (const std::exception& e) {
            fail_at(kv.line, e.what());
        }
    } else if (k == "model.width") cfg.model.width = as_int(1);
    else if (k == "model.blocks") cfg.model.n_blocks = as_int(1);
    else if (k == "model.temb_dim") cfg.model.temb_dim = as_int(2);
    else if (k == "weight.scheme") {
        if (v == "uniform") cfg.weight.scheme = WeightScheme::uniform;
        else if (v == "table") cfg.weight.scheme = WeightScheme::table;
        else fail_at(kv.line, "weight.scheme must be uniform or table, got '" + v + "'");
    } else if (k == "weight.table_file") cfg.weight.table_file = v;
    else fail_at(kv.line, "unknown key '" + k + "'");
}

}  // namespace

RunConfig parse_config_text(const std::string& content) {
    RunConfig cfg = default_config();
    std::istringstream in(content);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        const auto trimmed = text::trim(line);
        if (trimmed.empty()) continue;
        const auto eq = trimmed.find('=');
        if (eq == std::string_view::npos)
            fail_at(line_no, "expected 'key = value', got '" + std::string(trimmed) + "'");
        KeyValue kv;
        kv.key = std::string(text::trim(trimmed.substr(0, eq)));
        kv.value = std::string(text::trim(trimmed.substr(eq + 1)));
        kv.line = line_no;
        if (kv.key.empty()) fail_at(line_no, "empty key");
        apply(cfg, kv);
    }
    cfg.validate();
    return cfg;
}

RunConfig parse_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw io_error("cannot open config '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str());
}

std::string serialize_config(const RunConfig& cfg) {
    std::ostringstream out;
    out << "dataset = " << cfg.dataset << '\n';
    out << "n_train = " << cfg.n_train << '\n';
    out << "T = " << cfg.T << '\n';
    out << "steps = " << cfg.steps << '\n';
    out << "batch = " << cfg.batch << '\n';
    out << "lr = " << text::format_double(cfg.lr) << '\n';
    out << "ema_decay = " << text::format_double(cfg.ema_decay) << '\n';
    out << "seed = " << cfg.seed << '\n';
    out << "sample_steps = " << cfg.sample_steps << '\n';
    out << "mask.strategy = " << to_string(cfg.mask.strategy) << '\n';
    out << "mask.alpha = " << text::format_double(cfg.mask.alpha) << '\n';
    out << "mask.beta = " << text::format_double(cfg.mask.beta) << '\n';
    out << "mask.seed = " << cfg.mask.seed << '\n';
    out << "model.variant = " << to_string(cfg.model.routing_variant) << '\n';
    out << "model.width = " << cfg.model.width << '\n';
    out << "model.blocks = " << cfg.model.n_blocks << '\n';
    out << "model.temb_dim = " << cfg.model.temb_dim << '\n';
    out << "weight.scheme = " << (cfg.weight.scheme == WeightScheme::uniform ? "uniform" : "table")
        << '\n';
    if (!cfg.weight.table_file.empty()) out << "weight.table_file = " << cfg.weight.table_file << '\n';
    return out.str();
}

}  // namespace dtr
