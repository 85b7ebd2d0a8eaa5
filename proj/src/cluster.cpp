#include "aot/cluster.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace aot {

namespace {

double sq_dist(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return s;
}

struct Partition {
    const std::vector<std::vector<double>>& feats;
    std::vector<int> assign;
    std::vector<std::vector<int>> members;  // handle -> sorted point indices
    std::vector<std::vector<double>> centroids;
    std::vector<char> alive;

    Partition(const std::vector<std::vector<double>>& f, std::vector<int> init)
        : feats(f), assign(std::move(init)) {
        int max_h = 0;
        for (int h : assign) max_h = std::max(max_h, h);
        members.resize(max_h + 1);
        for (int p = 0; p < static_cast<int>(assign.size()); ++p)
            members[assign[p]].push_back(p);
        alive.assign(members.size(), 0);
        centroids.resize(members.size());
        for (std::size_t h = 0; h < members.size(); ++h) {
            if (!members[h].empty()) {
                alive[h] = 1;
                update_centroid(static_cast<int>(h));
            }
        }
    }

    int dim() const { return feats.empty() ? 0 : static_cast<int>(feats[0].size()); }

    int n_alive() const {
        int n = 0;
        for (char a : alive) n += a;
        return n;
    }

    void update_centroid(int h) {
        centroids[h].assign(dim(), 0.0);
        for (int p : members[h])
            for (int i = 0; i < dim(); ++i) centroids[h][i] += feats[p][i];
        const double inv = 1.0 / static_cast<double>(members[h].size());
        for (double& v : centroids[h]) v *= inv;
    }

    void apply(std::span<const std::pair<int, int>> moves) {
        for (auto [p, target] : moves) {
            const int from = assign[p];
            auto& src = members[from];
            src.erase(std::find(src.begin(), src.end(), p));
            if (static_cast<int>(members.size()) <= target) {
                members.resize(target + 1);
                centroids.resize(target + 1);
                alive.resize(target + 1, 0);
            }
            members[target].push_back(p);
            alive[target] = 1;
            assign[p] = target;
            if (src.empty()) alive[from] = 0;
        }
        for (auto& m : members) std::sort(m.begin(), m.end());
        for (std::size_t h = 0; h < members.size(); ++h)
            if (alive[h]) update_centroid(static_cast<int>(h));
    }

    double sse(int h) const {
        double s = 0.0;
        for (int p : members[h]) s += sq_dist(feats[p], centroids[h]);
        return s;
    }

    // Mean member-to-centroid distance over all points.
    double mean_scatter() const {
        double s = 0.0;
        for (std::size_t h = 0; h < members.size(); ++h) {
            if (!alive[h]) continue;
            for (int p : members[h]) s += std::sqrt(sq_dist(feats[p], centroids[h]));
        }
        return s / static_cast<double>(assign.size());
    }
};

// Deterministic 2-means: seeds at the member farthest from the centroid and
// the member farthest from that seed, then Lloyd iterations.
bool two_means(const Partition& part, int h, std::vector<int>& part_b, double& new_sse) {
    const auto& members = part.members[h];
    const int n = static_cast<int>(members.size());
    int seed_a = members[0];
    double best = -1.0;
    for (int p : members) {
        const double d = sq_dist(part.feats[p], part.centroids[h]);
        if (d > best) {
            best = d;
            seed_a = p;
        }
    }
    int seed_b = members[0];
    best = -1.0;
    for (int p : members) {
        const double d = sq_dist(part.feats[p], part.feats[seed_a]);
        if (d > best) {
            best = d;
            seed_b = p;
        }
    }
    if (seed_b == seed_a) return false;

    const int dim = part.dim();
    std::vector<double> ca(part.feats[seed_a].begin(), part.feats[seed_a].end());
    std::vector<double> cb(part.feats[seed_b].begin(), part.feats[seed_b].end());
    std::vector<char> in_b(n, 0);
    for (int it = 0; it < 10; ++it) {
        bool changed = false;
        int na = 0, nb = 0;
        for (int m = 0; m < n; ++m) {
            const int p = members[m];
            const char b = sq_dist(part.feats[p], cb) < sq_dist(part.feats[p], ca) ? 1 : 0;
            if (b != in_b[m]) changed = true;
            in_b[m] = b;
            (b ? nb : na) += 1;
        }
        if (na == 0 || nb == 0) return false;
        ca.assign(dim, 0.0);
        cb.assign(dim, 0.0);
        for (int m = 0; m < n; ++m) {
            const int p = members[m];
            auto& c = in_b[m] ? cb : ca;
            for (int i = 0; i < dim; ++i) c[i] += part.feats[p][i];
        }
        for (double& v : ca) v /= na;
        for (double& v : cb) v /= nb;
        if (!changed) break;
    }
    part_b.clear();
    new_sse = 0.0;
    for (int m = 0; m < n; ++m) {
        const int p = members[m];
        if (in_b[m]) {
            part_b.push_back(p);
            new_sse += sq_dist(part.feats[p], cb);
        } else {
            new_sse += sq_dist(part.feats[p], ca);
        }
    }
    return !part_b.empty() && static_cast<int>(part_b.size()) < n;
}

}  // namespace

IsodataResult isodata(const std::vector<std::vector<double>>& feats, std::vector<int> init,
                      int max_k, const IsodataConfig& cfg, const MoveAttempt& try_move) {
    if (feats.empty()) throw std::invalid_argument("isodata needs at least one point");
    if (init.size() != feats.size()) throw std::invalid_argument("init assignment size mismatch");

    Partition part(feats, std::move(init));
    IsodataResult result;

    auto attempt = [&](std::span<const std::pair<int, int>> moves) {
        if (try_move && !try_move(moves)) return false;
        part.apply(moves);
        return true;
    };

    for (int sweep = 0; sweep < cfg.max_sweeps; ++sweep) {
        bool changed = false;

        // Reassignment: move each point to its nearest centroid.
        for (int p = 0; p < static_cast<int>(feats.size()); ++p) {
            int nearest = -1;
            double best = std::numeric_limits<double>::infinity();
            for (std::size_t h = 0; h < part.members.size(); ++h) {
                if (!part.alive[h]) continue;
                const double d = sq_dist(feats[p], part.centroids[h]);
                if (d < best) {
                    best = d;
                    nearest = static_cast<int>(h);
                }
            }
            if (nearest != part.assign[p]) {
                const std::pair<int, int> mv{p, nearest};
                if (attempt({&mv, 1})) {
                    ++result.reassigns;
                    changed = true;
                }
            }
        }

        // Merge: candidate pairs by ascending centroid distance.
        const double theta_m = cfg.merge_factor * part.mean_scatter();
        struct Pair {
            double dist;
            int a, b;
        };
        std::vector<Pair> pairs;
        for (std::size_t a = 0; a < part.members.size(); ++a) {
            if (!part.alive[a]) continue;
            for (std::size_t b = a + 1; b < part.members.size(); ++b) {
                if (!part.alive[b]) continue;
                pairs.push_back({std::sqrt(sq_dist(part.centroids[a], part.centroids[b])),
                                 static_cast<int>(a), static_cast<int>(b)});
            }
        }
        std::sort(pairs.begin(), pairs.end(), [](const Pair& x, const Pair& y) {
            if (x.dist != y.dist) return x.dist < y.dist;
            return x.a != y.a ? x.a < y.a : x.b < y.b;
        });
        for (const Pair& pr : pairs) {
            if (!part.alive[pr.a] || !part.alive[pr.b]) continue;
            if (part.n_alive() <= 1) break;
            const double d = std::sqrt(sq_dist(part.centroids[pr.a], part.centroids[pr.b]));
            if (d > theta_m) continue;
            std::vector<std::pair<int, int>> moves;
            for (int p : part.members[pr.b]) moves.push_back({p, pr.a});
            if (attempt(moves)) {
                ++result.merges;
                changed = true;
            }
        }

        // Split: clusters by descending SSE, gated by the 2-means gain test.
        struct Cand {
            double sse;
            int h;
        };
        std::vector<Cand> cands;
        for (std::size_t h = 0; h < part.members.size(); ++h) {
            if (part.alive[h] && static_cast<int>(part.members[h].size()) >= cfg.min_split_size)
                cands.push_back({part.sse(static_cast<int>(h)), static_cast<int>(h)});
        }
        std::sort(cands.begin(), cands.end(), [](const Cand& x, const Cand& y) {
            if (x.sse != y.sse) return x.sse > y.sse;
            return x.h < y.h;
        });
        for (const Cand& cd : cands) {
            if (part.n_alive() >= max_k) break;
            if (!part.alive[cd.h]) continue;
            const double old_sse = part.sse(cd.h);
            std::vector<int> part_b;
            double new_sse = 0.0;
            if (!two_means(part, cd.h, part_b, new_sse)) continue;
            if (new_sse > cfg.split_gain * old_sse) continue;
            const int fresh = static_cast<int>(part.members.size());
            std::vector<std::pair<int, int>> moves;
            for (int p : part_b) moves.push_back({p, fresh});
            if (attempt(moves)) {
                ++result.splits;
                changed = true;
            }
        }

        if (!changed) break;
    }

    result.assignment = part.assign;
    result.alive = part.alive;
    result.n_clusters = part.n_alive();
    return result;
}

}  // namespace aot
