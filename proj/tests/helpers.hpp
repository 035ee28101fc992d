#pragma once

#include "catch_amalgamated.hpp"
#include "cascade/cascade.hpp"

#include <random>

namespace th {

using namespace cascade;

inline std::mt19937_64& rng() {
    static std::mt19937_64 g(0x5eed2024);
    return g;
}
inline double unif(double a, double b) { return std::uniform_real_distribution<double>(a, b)(rng()); }
inline int unif_int(int a, int b) { return std::uniform_int_distribution<int>(a, b)(rng()); }
inline cplx crand(double s = 1.0) { return {unif(-s, s), unif(-s, s)}; }

inline Vec random_vec(int m, double s = 1.0) {
    Vec v(m);
    for (int i = 0; i < m; ++i) v(i) = crand(s);
    return v;
}

inline Mat random_mat(int m, double s = 1.0) {
    Mat a(m, m);
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) a(i, j) = crand(s);
    return a;
}

inline SeqState random_state(int m, int len, Exponent p = Exponent::one(), std::int64_t offset = 0) {
    std::vector<Vec> core;
    for (int k = 0; k < len; ++k) core.push_back(random_vec(m));
    return SeqState(m, offset, std::move(core), {}, {}, p);
}

/// Nonnegative real scalar state (m = 1).
inline SeqState random_positive_state(int len, std::int64_t offset = 0) {
    std::vector<Vec> core;
    for (int k = 0; k < len; ++k) core.push_back(Vec::Constant(1, unif(0.0, 1.0)));
    return SeqState(1, offset, std::move(core));
}

/// Stable A0 (spectrum shifted into the left half plane) and rank-one A1 = u v^T.
inline CascadeSystem random_rank1_system(int m, Exponent p = Exponent::one()) {
    Mat a0 = random_mat(m);
    a0 -= (norm2(a0) + 0.5) * Mat::Identity(m, m);
    const Vec u = random_vec(m), v = random_vec(m);
    return CascadeSystem(a0, u * v.transpose(), p);
}

inline double rel_err(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

}  // namespace th
