#include "dtr/masks.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "dtr/errors.hpp"
#include "dtr/rng.hpp"
#include "dtr/text.hpp"

namespace dtr {

const char* to_string(MaskStrategy s) {
    switch (s) {
        case MaskStrategy::full: return "full";
        case MaskStrategy::random: return "random";
        case MaskStrategy::dtr: return "dtr";
    }
    throw std::logic_error("unreachable mask strategy");
}

MaskStrategy mask_strategy_from_string(const std::string& s) {
    if (s == "full") return MaskStrategy::full;
    if (s == "random") return MaskStrategy::random;
    if (s == "dtr") return MaskStrategy::dtr;
    throw std::invalid_argument("unknown mask strategy '" + s + "' (expected full|random|dtr)");
}

int MaskSpec::active_channels() const {
    return int(std::floor(beta * C));
}

void MaskSpec::validate() const {
    if (T < 1) throw std::invalid_argument("mask spec: T must be >= 1, got " + std::to_string(T));
    if (C < 1) throw std::invalid_argument("mask spec: C must be >= 1, got " + std::to_string(C));
    if (!(beta > 0.0 && beta <= 1.0))
        throw std::invalid_argument("mask spec: beta must be in (0, 1], got " + text::format_double(beta));
    if (!(alpha > 0.0))
        throw std::invalid_argument("mask spec: alpha must be > 0, got " + text::format_double(alpha));
    if (active_channels() < 1)
        throw std::invalid_argument("mask spec: floor(beta * C) must be >= 1, got " +
                                    std::to_string(active_channels()));
}

bool operator==(const MaskSpec& a, const MaskSpec& b) {
    return a.strategy == b.strategy && a.T == b.T && a.C == b.C && a.alpha == b.alpha &&
           a.beta == b.beta && a.seed == b.seed;
}

int MaskBank::row_sum(int i) const {
    const uint8_t* r = row(i);
    return std::accumulate(r, r + spec.C, 0);
}

namespace {

// x^alpha, with integral alpha evaluated by repeated squaring (plain IEEE
// multiplies, identical on every platform).
double pow_shift(double x, double alpha) {
    const double ai = std::floor(alpha);
    if (ai == alpha && ai >= 1.0 && ai <= 512.0) {
        auto n = static_cast<unsigned>(ai);
        double result = 1.0, base = x;
        while (n > 0) {
            if (n & 1u) result *= base;
            base *= base;
            n >>= 1;
        }
        return result;
    }
    return std::pow(x, alpha);
}

}  // namespace

int dtr_offset(const MaskSpec& spec, int i) {
    const int slack = spec.C - spec.active_channels();
    const double x = spec.T == 1 ? 0.0 : double(i) / double(spec.T - 1);
    // std::round is half-away-from-zero, the tie rule used throughout.
    return int(std::round(double(slack) * pow_shift(x, spec.alpha)));
}

MaskBank make_dtr_mask(const MaskSpec& spec) {
    if (spec.strategy != MaskStrategy::dtr)
        throw std::invalid_argument("make_dtr_mask: spec strategy must be dtr");
    spec.validate();
    const int cb = spec.active_channels();
    MaskBank bank{spec, std::vector<uint8_t>(size_t(spec.T) * spec.C, 0)};
    for (int i = 0; i < spec.T; ++i) {
        const int off = dtr_offset(spec, i);
        std::fill_n(bank.rows.begin() + size_t(i) * spec.C + off, cb, uint8_t{1});
    }
    return bank;
}

MaskBank make_random_mask(const MaskSpec& spec) {
    if (spec.strategy != MaskStrategy::random)
        throw std::invalid_argument("make_random_mask: spec strategy must be random");
    spec.validate();
    const int cb = spec.active_channels();
    std::mt19937_64 eng(spec.seed);
    MaskBank bank{spec, std::vector<uint8_t>(size_t(spec.T) * spec.C, 0)};
    std::vector<int> idx(spec.C);
    for (int i = 0; i < spec.T; ++i) {
        // Partial Fisher-Yates: the first cb entries are a uniform subset.
        std::iota(idx.begin(), idx.end(), 0);
        for (int k = 0; k < cb; ++k) {
            const int j = k + int(rng::uniform_below(eng, uint64_t(spec.C - k)));
            std::swap(idx[k], idx[j]);
            bank.rows[size_t(i) * spec.C + idx[k]] = 1;
        }
    }
    return bank;
}

MaskBank make_full_mask(int T, int C) {
    MaskSpec spec;
    spec.strategy = MaskStrategy::full;
    spec.T = T;
    spec.C = C;
    spec.beta = 1.0;
    spec.alpha = 1.0;
    spec.seed = 0;
    spec.validate();
    return MaskBank{spec, std::vector<uint8_t>(size_t(T) * C, 1)};
}

MaskBank make_bank(const MaskSpec& spec) {
    switch (spec.strategy) {
        case MaskStrategy::full: {
            spec.validate();
            MaskBank bank = make_full_mask(spec.T, spec.C);
            bank.spec = spec;
            return bank;
        }
        case MaskStrategy::random: return make_random_mask(spec);
        case MaskStrategy::dtr: return make_dtr_mask(spec);
    }
    throw std::logic_error("unreachable mask strategy");
}

MaskBank make_bank_for_width(const MaskSpec& spec, int width) {
    MaskSpec s = spec;
    s.C = width;
    return make_bank(s);
}

int shared_channels(const MaskBank& bank, int i, int j) {
    const int T = bank.spec.T;
    if (i < 0 || i >= T || j < 0 || j >= T)
        throw std::out_of_range("shared_channels: row index out of range [0, " + std::to_string(T) + ")");
    const uint8_t* a = bank.row(i);
    const uint8_t* b = bank.row(j);
    int n = 0;
    for (int c = 0; c < bank.spec.C; ++c) n += a[c] & b[c];
    return n;
}

double expected_shared_channels(int c, int c_beta) {
    if (c_beta < 1) throw std::invalid_argument("expected_shared_channels: c_beta must be >= 1");
    if (c_beta > c) throw std::invalid_argument("expected_shared_channels: c_beta must be <= c");
    if (c > 64)
        throw std::invalid_argument("expected_shared_channels: exact arithmetic supports c <= 64");

    // Pascal's triangle in unsigned 128-bit; binom(64, 32) < 2^64 so every
    // entry and every summand below stays exact.
    using u128 = unsigned __int128;
    std::vector<std::vector<u128>> binom(size_t(c) + 1);
    for (int n = 0; n <= c; ++n) {
        binom[n].assign(size_t(n) + 1, 1);
        for (int k = 1; k < n; ++k) binom[n][k] = binom[n - 1][k - 1] + binom[n - 1][k];
    }
    auto choose = [&](int n, int k) -> u128 {
        if (k < 0 || k > n) return 0;
        return binom[n][k];
    };

    u128 numer = 0;
    for (int k = 1; k <= c_beta; ++k)
        numer += u128(k) * choose(c_beta, k) * choose(c - c_beta, c_beta - k);
    const u128 denom = choose(c, c_beta);
    return double((long double)(numer) / (long double)(denom));
}

std::vector<int> overlap_matrix(const MaskBank& bank) {
    const int T = bank.spec.T;
    std::vector<int> m(size_t(T) * T);
    for (int i = 0; i < T; ++i) {
        m[size_t(i) * T + i] = shared_channels(bank, i, i);
        for (int j = i + 1; j < T; ++j) {
            const int s = shared_channels(bank, i, j);
            m[size_t(i) * T + j] = s;
            m[size_t(j) * T + i] = s;
        }
    }
    return m;
}

void write_mask_csv(const MaskBank& bank, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw io_error("cannot open '" + path + "' for writing");
    out << bank.spec.T << ',' << bank.spec.C << ',' << to_string(bank.spec.strategy) << ','
        << text::format_double(bank.spec.alpha) << ',' << text::format_double(bank.spec.beta) << ','
        << bank.spec.seed << '\n';
    for (int i = 0; i < bank.spec.T; ++i) {
        for (int c = 0; c < bank.spec.C; ++c) {
            if (c) out << ',';
            out << int(bank.at(i, c));
        }
        out << '\n';
    }
    if (!out) throw io_error("write failed for '" + path + "'");
}

MaskBank read_mask_csv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw io_error("cannot open '" + path + "' for reading");
    std::string line;
    if (!std::getline(in, line)) throw std::invalid_argument("mask csv: missing header line");
    auto fields = text::split(line, ',');
    if (fields.size() != 6)
        throw std::invalid_argument("mask csv: header must have 6 fields (T,C,strategy,alpha,beta,seed)");
    MaskSpec spec;
    spec.T = int(text::parse_int(fields[0]));
    spec.C = int(text::parse_int(fields[1]));
    spec.strategy = mask_strategy_from_string(std::string(text::trim(fields[2])));
    spec.alpha = text::parse_double(fields[3]);
    spec.beta = text::parse_double(fields[4]);
    spec.seed = text::parse_uint(fields[5]);
    spec.validate();

    MaskBank bank{spec, std::vector<uint8_t>(size_t(spec.T) * spec.C, 0)};
    for (int i = 0; i < spec.T; ++i) {
        if (!std::getline(in, line))
            throw std::invalid_argument("mask csv: expected " + std::to_string(spec.T) +
                                        " mask rows, file ends at row " + std::to_string(i));
        auto cells = text::split(line, ',');
        if (int(cells.size()) != spec.C)
            throw std::invalid_argument("mask csv: row " + std::to_string(i) + " has " +
                                        std::to_string(cells.size()) + " cells, expected " +
                                        std::to_string(spec.C));
        for (int c = 0; c < spec.C; ++c) {
            const long long v = text::parse_int(cells[c]);
            if (v != 0 && v != 1)
                throw std::invalid_argument("mask csv: entries must be 0 or 1, row " + std::to_string(i));
            bank.rows[size_t(i) * spec.C + c] = uint8_t(v);
        }
        if (bank.row_sum(i) != spec.active_channels())
            throw std::invalid_argument("mask csv: row " + std::to_string(i) + " sums to " +
                                        std::to_string(bank.row_sum(i)) + ", expected C_beta = " +
                                        std::to_string(spec.active_channels()));
    }
    return bank;
}

void write_mask_pgm(const MaskBank& bank, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw io_error("cannot open '" + path + "' for writing");
    out << "P2\n" << bank.spec.C << ' ' << bank.spec.T << "\n1\n";
    for (int i = 0; i < bank.spec.T; ++i) {
        for (int c = 0; c < bank.spec.C; ++c) {
            if (c) out << ' ';
            out << int(bank.at(i, c));
        }
        out << '\n';
    }
    if (!out) throw io_error("write failed for '" + path + "'");
}

}  // namespace dtr
