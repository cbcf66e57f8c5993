#include "dtr/checkpoint.hpp"

#include <cstring>
#include <fstream>
#include <stdexcept>

#include "dtr/errors.hpp"

namespace dtr {

namespace {

constexpr char kMagic[8] = {'D', 'T', 'R', 'C', 'K', 'P', 'T', '1'};

void put_u16(std::ostream& out, uint16_t v) {
    const char bytes[2] = {char(v & 0xff), char(v >> 8)};
    out.write(bytes, 2);
}
void put_u32(std::ostream& out, uint32_t v) {
    char bytes[4];
    for (int i = 0; i < 4; ++i) bytes[i] = char((v >> (8 * i)) & 0xff);
    out.write(bytes, 4);
}
void put_f64(std::ostream& out, double v) {
    uint64_t bits;
    std::memcpy(&bits, &v, 8);
    char bytes[8];
    for (int i = 0; i < 8; ++i) bytes[i] = char((bits >> (8 * i)) & 0xff);
    out.write(bytes, 8);
}

uint16_t get_u16(std::istream& in) {
    unsigned char bytes[2];
    in.read(reinterpret_cast<char*>(bytes), 2);
    if (!in) throw io_error("checkpoint: truncated file");
    return uint16_t(bytes[0] | (bytes[1] << 8));
}
uint32_t get_u32(std::istream& in) {
    unsigned char bytes[4];
    in.read(reinterpret_cast<char*>(bytes), 4);
    if (!in) throw io_error("checkpoint: truncated file");
    uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= uint32_t(bytes[i]) << (8 * i);
    return v;
}
double get_f64(std::istream& in) {
    unsigned char bytes[8];
    in.read(reinterpret_cast<char*>(bytes), 8);
    if (!in) throw io_error("checkpoint: truncated file");
    uint64_t bits = 0;
    for (int i = 0; i < 8; ++i) bits |= uint64_t(bytes[i]) << (8 * i);
    double v;
    std::memcpy(&v, &bits, 8);
    return v;
}

void write_tensor(std::ostream& out, const std::string& name, const std::vector<int>& dims,
                  const std::vector<double>& data) {
    if (name.size() > 0xffff) throw std::invalid_argument("checkpoint: tensor name too long");
    put_u16(out, uint16_t(name.size()));
    out.write(name.data(), std::streamsize(name.size()));
    out.put(char(dims.size()));
    for (int d : dims) put_u32(out, uint32_t(d));
    for (double v : data) put_f64(out, v);
}

struct RawTensor {
    std::string name;
    std::vector<int> dims;
    std::vector<double> data;
};

RawTensor read_tensor(std::istream& in) {
    RawTensor t;
    const uint16_t name_len = get_u16(in);
    t.name.resize(name_len);
    in.read(t.name.data(), name_len);
    if (!in) throw io_error("checkpoint: truncated tensor name");
    const int rank = in.get();
    if (rank < 0 || rank > 8) throw io_error("checkpoint: bad tensor rank");
    int64_t n = 1;
    for (int i = 0; i < rank; ++i) {
        const uint32_t d = get_u32(in);
        if (d == 0 || d > (1u << 28)) throw io_error("checkpoint: bad tensor dim");
        t.dims.push_back(int(d));
        n *= d;
    }
    t.data.resize(size_t(n));
    for (int64_t i = 0; i < n; ++i) t.data[size_t(i)] = get_f64(in);
    return t;
}

int strategy_code(MaskStrategy s) {
    switch (s) {
        case MaskStrategy::full: return 0;
        case MaskStrategy::random: return 1;
        case MaskStrategy::dtr: return 2;
    }
    throw std::logic_error("unreachable");
}
MaskStrategy strategy_from_code(int code) {
    switch (code) {
        case 0: return MaskStrategy::full;
        case 1: return MaskStrategy::random;
        case 2: return MaskStrategy::dtr;
    }
    throw io_error("checkpoint: bad mask strategy code " + std::to_string(code));
}

int variant_code(RoutingVariant v) {
    switch (v) {
        case RoutingVariant::none: return 0;
        case RoutingVariant::adm_style: return 1;
        case RoutingVariant::dit_style: return 2;
    }
    throw std::logic_error("unreachable");
}
RoutingVariant variant_from_code(int code) {
    switch (code) {
        case 0: return RoutingVariant::none;
        case 1: return RoutingVariant::adm_style;
        case 2: return RoutingVariant::dit_style;
    }
    throw io_error("checkpoint: bad routing variant code " + std::to_string(code));
}

}  // namespace

void write_checkpoint(const Checkpoint& ckpt, const std::string& path) {
    if (!ckpt.params.same_layout(ckpt.ema))
        throw std::invalid_argument("checkpoint: params/ema layout mismatch");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw io_error("cannot open '" + path + "' for writing");
    out.write(kMagic, 8);

    const uint32_t count = 3 + 2 * uint32_t(ckpt.params.count());
    put_u32(out, count);

    write_tensor(out, "__meta__/step", {1}, {double(ckpt.step)});
    write_tensor(out, "__meta__/model_cfg", {5},
                 {double(ckpt.model_cfg.data_dim), double(ckpt.model_cfg.width),
                  double(ckpt.model_cfg.n_blocks), double(variant_code(ckpt.model_cfg.routing_variant)),
                  double(ckpt.model_cfg.temb_dim)});
    // seed split into 32-bit halves so the value survives the f64 payload
    write_tensor(out, "__meta__/mask_spec", {7},
                 {double(strategy_code(ckpt.mask_spec.strategy)), double(ckpt.mask_spec.T),
                  double(ckpt.mask_spec.C), ckpt.mask_spec.alpha, ckpt.mask_spec.beta,
                  double(uint32_t(ckpt.mask_spec.seed & 0xffffffffULL)),
                  double(uint32_t(ckpt.mask_spec.seed >> 32))});

    for (const auto& t : ckpt.params.tensors) write_tensor(out, "param/" + t.name, t.dims, t.data);
    for (const auto& t : ckpt.ema.tensors) write_tensor(out, "ema/" + t.name, t.dims, t.data);
    if (!out) throw io_error("write failed for '" + path + "'");
}

Checkpoint read_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw io_error("cannot open '" + path + "' for reading");
    char magic[8];
    in.read(magic, 8);
    if (!in || std::memcmp(magic, kMagic, 8) != 0)
        throw io_error("'" + path + "' is not a checkpoint (bad magic)");
    const uint32_t count = get_u32(in);

    Checkpoint ckpt;
    bool saw_step = false, saw_cfg = false, saw_spec = false;
    for (uint32_t i = 0; i < count; ++i) {
        RawTensor t = read_tensor(in);
        if (t.name == "__meta__/step") {
            if (t.data.size() != 1) throw io_error("checkpoint: bad step tensor");
            ckpt.step = uint64_t(t.data[0]);
            saw_step = true;
        } else if (t.name == "__meta__/model_cfg") {
            if (t.data.size() != 5) throw io_error("checkpoint: bad model_cfg tensor");
            ckpt.model_cfg.data_dim = int(t.data[0]);
            ckpt.model_cfg.width = int(t.data[1]);
            ckpt.model_cfg.n_blocks = int(t.data[2]);
            ckpt.model_cfg.routing_variant = variant_from_code(int(t.data[3]));
            ckpt.model_cfg.temb_dim = int(t.data[4]);
            saw_cfg = true;
        } else if (t.name == "__meta__/mask_spec") {
            if (t.data.size() != 7) throw io_error("checkpoint: bad mask_spec tensor");
            ckpt.mask_spec.strategy = strategy_from_code(int(t.data[0]));
            ckpt.mask_spec.T = int(t.data[1]);
            ckpt.mask_spec.C = int(t.data[2]);
            ckpt.mask_spec.alpha = t.data[3];
            ckpt.mask_spec.beta = t.data[4];
            ckpt.mask_spec.seed = uint64_t(uint32_t(t.data[5])) | (uint64_t(uint32_t(t.data[6])) << 32);
            saw_spec = true;
        } else if (t.name.starts_with("param/")) {
            int idx = ckpt.params.add(t.name.substr(6), t.dims);
            ckpt.params[idx].data = std::move(t.data);
        } else if (t.name.starts_with("ema/")) {
            int idx = ckpt.ema.add(t.name.substr(4), t.dims);
            ckpt.ema[idx].data = std::move(t.data);
        } else {
            throw io_error("checkpoint: unexpected tensor '" + t.name + "'");
        }
    }
    if (!saw_step || !saw_cfg || !saw_spec)
        throw io_error("checkpoint: missing __meta__ tensors");
    if (!ckpt.params.same_layout(ckpt.ema))
        throw io_error("checkpoint: params/ema layout mismatch");
    return ckpt;
}

}  // namespace dtr
