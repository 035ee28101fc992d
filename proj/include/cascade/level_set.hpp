#pragma once

// Contours of |phi(lambda)| = 1 by marching squares. Crossings are refined by
// bisection along grid edges; cells touching a pole of phi are skipped.

#include "cascade/parallel.hpp"
#include "cascade/system.hpp"

#include <unordered_map>

namespace cascade {

struct Box {
    double re_min = 0.0, re_max = 0.0, im_min = 0.0, im_max = 0.0;
};

struct LevelSet {
    std::vector<std::vector<cplx>> polylines;
    std::vector<bool> closed;
    double grid_resolution = 0.0;
    Box bounding_box;

    [[nodiscard]] std::size_t vertex_count() const {
        std::size_t n = 0;
        for (const auto& p : polylines) n += p.size();
        return n;
    }
};

namespace detail {

struct Grid {
    int nx = 0, ny = 0;
    double x0 = 0.0, y0 = 0.0, h = 0.0, hy = 0.0;
    [[nodiscard]] cplx node(int i, int j) const { return {x0 + h * i, y0 + hy * j}; }
};

}  // namespace detail

[[nodiscard]] inline LevelSet trace_level_set(const RatFun& phi, const Box& box, double resolution) {
    if (!(box.re_max > box.re_min) || !(box.im_max > box.im_min))
        throw Error(ErrorKind::EmptyBox, "bounding box is degenerate");
    if (!(resolution > 0.0)) throw Error(ErrorKind::InvalidArgument, "resolution must be positive");

    detail::Grid g;
    g.nx = static_cast<int>(std::ceil((box.re_max - box.re_min) / resolution - 1e-9)) + 1;
    g.ny = static_cast<int>(std::ceil((box.im_max - box.im_min) / resolution - 1e-9)) + 1;
    g.nx = std::max(g.nx, 2);
    g.ny = std::max(g.ny, 2);
    g.x0 = box.re_min;
    g.y0 = box.im_min;
    g.h = (box.re_max - box.re_min) / (g.nx - 1);
    g.hy = (box.im_max - box.im_min) / (g.ny - 1);

    auto level = [&](cplx z) { return std::abs(phi(z)) - 1.0; };

    std::vector<double> val(static_cast<std::size_t>(g.nx) * static_cast<std::size_t>(g.ny));
    parallel_for(val.size(), [&](std::size_t idx) {
        const int i = static_cast<int>(idx % static_cast<std::size_t>(g.nx));
        const int j = static_cast<int>(idx / static_cast<std::size_t>(g.nx));
        val[idx] = level(g.node(i, j));
    }, 256);
    auto at = [&](int i, int j) { return val[static_cast<std::size_t>(j) * static_cast<std::size_t>(g.nx) + static_cast<std::size_t>(i)]; };

    const auto poles = phi.poles();
    auto cell_has_pole = [&](int i, int j) {
        const double xa = g.x0 + g.h * i, xb = xa + g.h, ya = g.y0 + g.hy * j, yb = ya + g.hy;
        const double pad = 1e-12 * (1.0 + std::abs(xa) + std::abs(ya));
        for (cplx p : poles)
            if (p.real() >= xa - pad && p.real() <= xb + pad && p.imag() >= ya - pad && p.imag() <= yb + pad) return true;
        return false;
    };

    // Edge keys: 2*node for the edge to the right of node, 2*node+1 for the edge above it.
    std::unordered_map<std::int64_t, cplx> edge_point;
    auto node_id = [&](int i, int j) { return static_cast<std::int64_t>(j) * g.nx + i; };
    auto crossing = [&](std::int64_t key, int i, int j, bool horizontal) {
        auto it = edge_point.find(key);
        if (it != edge_point.end()) return;
        cplx a = g.node(i, j), b = horizontal ? g.node(i + 1, j) : g.node(i, j + 1);
        double fa = at(i, j);
        const double fb = horizontal ? at(i + 1, j) : at(i, j + 1);
        cplx mid = 0.5 * (a + b);
        if (fa == 0.0) {
            mid = a;
        } else if (fb == 0.0) {
            mid = b;
        } else {
            for (int step = 0; step < 40; ++step) {
                mid = 0.5 * (a + b);
                const double fm = level(mid);
                if (fm == 0.0) break;
                if ((fm >= 0.0) == (fa >= 0.0)) {
                    a = mid;
                    fa = fm;
                } else {
                    b = mid;
                }
            }
        }
        edge_point.emplace(key, mid);
    };

    std::vector<std::pair<std::int64_t, std::int64_t>> segments;
    for (int j = 0; j + 1 < g.ny; ++j) {
        for (int i = 0; i + 1 < g.nx; ++i) {
            const double v[4] = {at(i, j), at(i + 1, j), at(i + 1, j + 1), at(i, j + 1)};
            bool finite = true;
            for (double x : v) finite = finite && std::isfinite(x);
            if (!finite || cell_has_pole(i, j)) continue;
            int code = 0;
            for (int c = 0; c < 4; ++c)
                if (v[c] >= 0.0) code |= 1 << c;
            if (code == 0 || code == 15) continue;
            // edges: 0 bottom, 1 right, 2 top, 3 left
            const std::int64_t keys[4] = {2 * node_id(i, j), 2 * node_id(i + 1, j) + 1, 2 * node_id(i, j + 1),
                                          2 * node_id(i, j) + 1};
            auto edge = [&](int e) {
                switch (e) {
                    case 0: crossing(keys[0], i, j, true); break;
                    case 1: crossing(keys[1], i + 1, j, false); break;
                    case 2: crossing(keys[2], i, j + 1, true); break;
                    default: crossing(keys[3], i, j, false); break;
                }
                return keys[e];
            };
            auto seg = [&](int e1, int e2) { segments.emplace_back(edge(e1), edge(e2)); };
            const bool centre_in = level(g.node(i, j) + cplx(0.5 * g.h, 0.5 * g.hy)) >= 0.0;
            switch (code) {
                case 1: case 14: seg(3, 0); break;
                case 2: case 13: seg(0, 1); break;
                case 3: case 12: seg(3, 1); break;
                case 4: case 11: seg(1, 2); break;
                case 6: case 9: seg(0, 2); break;
                case 7: case 8: seg(3, 2); break;
                case 5:
                    if (centre_in) { seg(3, 2); seg(0, 1); } else { seg(3, 0); seg(1, 2); }
                    break;
                case 10:
                    if (centre_in) { seg(3, 0); seg(1, 2); } else { seg(3, 2); seg(0, 1); }
                    break;
                default: break;
            }
        }
    }

    // Chain segments through shared edge keys.
    std::unordered_map<std::int64_t, std::vector<std::size_t>> incident;
    for (std::size_t s = 0; s < segments.size(); ++s) {
        incident[segments[s].first].push_back(s);
        incident[segments[s].second].push_back(s);
    }
    std::vector<bool> used(segments.size(), false);
    auto other_segment = [&](std::int64_t key, std::size_t from) -> std::ptrdiff_t {
        for (std::size_t s : incident[key])
            if (s != from && !used[s]) return static_cast<std::ptrdiff_t>(s);
        return -1;
    };

    LevelSet out;
    out.grid_resolution = resolution;
    out.bounding_box = box;
    auto walk = [&](std::size_t s, std::int64_t key, std::vector<std::int64_t>& chain) {
        // continue from `key`, which is the free end of segment s
        std::size_t cur = s;
        for (;;) {
            const std::ptrdiff_t nxt = other_segment(key, cur);
            if (nxt < 0) break;
            cur = static_cast<std::size_t>(nxt);
            used[cur] = true;
            key = segments[cur].first == key ? segments[cur].second : segments[cur].first;
            chain.push_back(key);
        }
    };
    for (std::size_t s = 0; s < segments.size(); ++s) {
        if (used[s]) continue;
        used[s] = true;
        std::vector<std::int64_t> fwd{segments[s].first, segments[s].second};
        walk(s, segments[s].second, fwd);
        const bool is_closed = fwd.size() > 2 && fwd.back() == fwd.front();
        std::vector<std::int64_t> chain;
        if (!is_closed) {
            std::vector<std::int64_t> back;
            walk(s, segments[s].first, back);
            chain.assign(back.rbegin(), back.rend());
        }
        chain.insert(chain.end(), fwd.begin(), fwd.end());
        std::vector<cplx> pts;
        for (std::int64_t k : chain) {
            const cplx z = edge_point.at(k);
            if (pts.empty() || pts.back() != z) pts.push_back(z);
        }
        out.polylines.push_back(std::move(pts));
        out.closed.push_back(is_closed);
    }
    return out;
}

[[nodiscard]] inline LevelSet trace_level_set(const CharacteristicFn& cf, const Box& box, double resolution) {
    return trace_level_set(cf.phi, box, resolution);
}

}  // namespace cascade
