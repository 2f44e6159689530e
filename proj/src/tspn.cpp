#include "ppaview/tspn.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>

#include "ppaview/csv.hpp"
#include "ppaview/ppa.hpp"
#include "ppaview/random.hpp"

namespace ppaview {

bool viewpoint_feasible(const Vec3& r, const Patch& patch, double c, double r_safe, double tol) {
    const double d = (r - patch.centroid).norm();
    if (d < r_safe - tol || d == 0.0) return false;
    return ppa_constrained(r, patch) >= c - tol;
}

Neighborhood build_neighborhood(const Patch& patch, std::size_t patch_index, double c, double r_safe, int samples,
                                std::uint64_t seed) {
    if (!(c > 0.0) || !(r_safe > 0.0)) throw std::invalid_argument("threshold and r_safe must be positive");
    if (c > 1.0 / r_safe) {
        throw InfeasibleThresholdError("PPA threshold " + format_double(c) + " exceeds the largest feasible value 1/r_safe = " +
                                       format_double(1.0 / r_safe));
    }
    Neighborhood nb;
    nb.patch_index = patch_index;
    const Vec3 n = patch.normal.normalized();
    nb.candidate_viewpoints.push_back(patch.centroid + r_safe * n);

    // {ppa_constrained >= C} is the ball of diameter 1/C touching the patch.
    const double radius = 0.5 / c;
    const Vec3 center = patch.centroid + radius * n;
    Rng rng = make_stream(seed, "tspn/neighborhood/" + std::to_string(patch_index));
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    const long max_attempts = 200L * std::max(samples, 1);
    for (long a = 0; a < max_attempts && static_cast<int>(nb.candidate_viewpoints.size()) < samples + 1; ++a) {
        const Vec3 u(unit(rng), unit(rng), unit(rng));
        if (u.squaredNorm() > 1.0) continue;
        const Vec3 q = center + radius * u;
        if (viewpoint_feasible(q, patch, c, r_safe, 0.0)) nb.candidate_viewpoints.push_back(q);
    }
    return nb;
}

double path_length(const std::vector<Vec3>& points) {
    double len = 0;
    for (std::size_t i = 1; i < points.size(); ++i) len += (points[i] - points[i - 1]).norm();
    return len;
}

namespace {

struct Search {
    const std::vector<Neighborhood>* nbs_;
    std::vector<std::size_t> order;
    std::vector<std::size_t> choice;  // candidate index per stop

    const Vec3& at(std::size_t k) const { return (*nbs_)[order[k]].candidate_viewpoints[choice[k]]; }

    double length() const {
        double len = 0;
        for (std::size_t k = 1; k < order.size(); ++k) len += (at(k) - at(k - 1)).norm();
        return len;
    }

    static constexpr double kEps = 1e-12;

    bool two_opt() {
        const std::size_t m = order.size();
        bool improved = false;
        for (std::size_t i = 0; i + 1 < m; ++i) {
            for (std::size_t j = i + 1; j < m; ++j) {
                // Reverse [i, j]; legs (i-1,i) and (j,j+1) change.
                double before = 0, after = 0;
                if (i > 0) {
                    before += (at(i) - at(i - 1)).norm();
                    after += (at(j) - at(i - 1)).norm();
                }
                if (j + 1 < m) {
                    before += (at(j + 1) - at(j)).norm();
                    after += (at(j + 1) - at(i)).norm();
                }
                if (after < before - kEps) {
                    std::reverse(order.begin() + static_cast<long>(i), order.begin() + static_cast<long>(j) + 1);
                    std::reverse(choice.begin() + static_cast<long>(i), choice.begin() + static_cast<long>(j) + 1);
                    improved = true;
                }
            }
        }
        return improved;
    }

    bool or_opt() {
        const std::size_t m = order.size();
        bool improved = false;
        for (std::size_t seg = 1; seg <= 3 && seg < m; ++seg) {
            for (std::size_t i = 0; i + seg <= m; ++i) {
                const double base = length();
                auto best_order = order;
                auto best_choice = choice;
                double best = base;
                std::vector<std::size_t> so(order.begin() + static_cast<long>(i),
                                            order.begin() + static_cast<long>(i + seg));
                std::vector<std::size_t> sc(choice.begin() + static_cast<long>(i),
                                            choice.begin() + static_cast<long>(i + seg));
                std::vector<std::size_t> ro = order, rc = choice;
                ro.erase(ro.begin() + static_cast<long>(i), ro.begin() + static_cast<long>(i + seg));
                rc.erase(rc.begin() + static_cast<long>(i), rc.begin() + static_cast<long>(i + seg));
                for (std::size_t pos = 0; pos <= ro.size(); ++pos) {
                    if (pos == i) continue;
                    for (int rev = 0; rev < 2; ++rev) {
                        Search trial{nbs_, ro, rc};
                        auto o = so;
                        auto c = sc;
                        if (rev) {
                            std::reverse(o.begin(), o.end());
                            std::reverse(c.begin(), c.end());
                        }
                        trial.order.insert(trial.order.begin() + static_cast<long>(pos), o.begin(), o.end());
                        trial.choice.insert(trial.choice.begin() + static_cast<long>(pos), c.begin(), c.end());
                        const double len = trial.length();
                        if (len < best - kEps) {
                            best = len;
                            best_order = trial.order;
                            best_choice = trial.choice;
                        }
                    }
                }
                if (best < base - kEps) {
                    order = best_order;
                    choice = best_choice;
                    improved = true;
                }
            }
        }
        return improved;
    }

    // Best candidate per stop for the current order (shortest path through
    // the layered candidate graph).
    bool reselect() {
        const std::size_t m = order.size();
        if (m < 2) return false;
        double current = 0;
        for (std::size_t k = 1; k < m; ++k) current += (at(k) - at(k - 1)).norm();
        std::vector<std::vector<std::size_t>> back(m);
        std::vector<double> cost((*nbs_)[order[0]].candidate_viewpoints.size(), 0.0);
        for (std::size_t k = 1; k < m; ++k) {
            const auto& prev = (*nbs_)[order[k - 1]].candidate_viewpoints;
            const auto& cur = (*nbs_)[order[k]].candidate_viewpoints;
            std::vector<double> next(cur.size(), std::numeric_limits<double>::infinity());
            back[k].assign(cur.size(), 0);
            for (std::size_t c = 0; c < cur.size(); ++c) {
                for (std::size_t q = 0; q < prev.size(); ++q) {
                    const double v = cost[q] + (cur[c] - prev[q]).norm();
                    if (v < next[c]) {
                        next[c] = v;
                        back[k][c] = q;
                    }
                }
            }
            cost = std::move(next);
        }
        const auto last = std::min_element(cost.begin(), cost.end());
        if (!(*last < current - kEps)) return false;
        std::size_t c = static_cast<std::size_t>(last - cost.begin());
        for (std::size_t k = m; k-- > 0;) {
            choice[k] = c;
            if (k > 0) c = back[k][c];
        }
        return true;
    }

    void local_search() {
        for (int guard = 0; guard < 10000; ++guard) {
            bool any = two_opt();
            any = reselect() || any;
            any = or_opt() || any;
            if (!any) break;
        }
    }
};

Vec3 centroid_of(const Neighborhood& nb) {
    Vec3 c = Vec3::Zero();
    for (const auto& v : nb.candidate_viewpoints) c += v;
    return c / static_cast<double>(nb.candidate_viewpoints.size());
}

std::size_t closest(const std::vector<Vec3>& cands, const Vec3& q) {
    std::size_t best = 0;
    for (std::size_t c = 1; c < cands.size(); ++c) {
        if ((cands[c] - q).squaredNorm() < (cands[best] - q).squaredNorm()) best = c;
    }
    return best;
}

Search nearest_neighbor(const std::vector<Neighborhood>& nbs, const std::vector<Vec3>& centroids, std::size_t start) {
    const std::size_t m = nbs.size();
    Search s{&nbs, {}, {}};
    std::vector<bool> used(m, false);
    std::size_t cur = start;
    used[cur] = true;
    s.order.push_back(cur);
    s.choice.push_back(0);
    // Start at the candidate nearest the next centroid once it is known.
    Vec3 here = centroids[cur];
    for (std::size_t step = 1; step < m; ++step) {
        std::size_t next = m;
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < m; ++j) {
            if (used[j]) continue;
            const double d = (centroids[j] - here).squaredNorm();
            if (d < best) {
                best = d;
                next = j;
            }
        }
        if (step == 1) {
            s.choice[0] = closest(nbs[cur].candidate_viewpoints, centroids[next]);
            here = s.at(0);
        }
        used[next] = true;
        s.order.push_back(next);
        s.choice.push_back(closest(nbs[next].candidate_viewpoints, here));
        here = s.at(s.order.size() - 1);
        cur = next;
    }
    return s;
}

}  // namespace

Tour solve_tour(const std::vector<Neighborhood>& nbs, std::uint64_t seed) {
    for (const auto& nb : nbs) {
        if (nb.candidate_viewpoints.empty()) {
            throw std::invalid_argument("solve_tour: neighborhood of patch " + std::to_string(nb.patch_index) +
                                        " has no candidates");
        }
    }
    Tour tour;
    if (nbs.empty()) return tour;

    std::vector<Vec3> centroids;
    for (const auto& nb : nbs) centroids.push_back(centroid_of(nb));

    const std::size_t m = nbs.size();
    Search best{&nbs, {}, {}};
    double best_len = std::numeric_limits<double>::infinity();
    tour.construction_length = std::numeric_limits<double>::infinity();
    for (std::size_t start = 0; start < m; ++start) {
        Search s = nearest_neighbor(nbs, centroids, start);
        tour.construction_length = std::min(tour.construction_length, s.length());
        s.local_search();
        const double len = s.length();
        if (len < best_len - Search::kEps) {
            best = s;
            best_len = len;
        }
    }

    Rng rng = make_stream(seed, "tspn/tour");
    if (m >= 3 && m < 8) {
        // Small instances: random restarts are cheap and escape the
        // order/candidate coupling that the local moves cannot.
        for (int k = 0; k < 40; ++k) {
            Search s = best;
            std::shuffle(s.order.begin(), s.order.end(), rng);
            for (std::size_t i = 0; i < m; ++i) {
                std::uniform_int_distribution<std::size_t> pick(0, nbs[s.order[i]].candidate_viewpoints.size() - 1);
                s.choice[i] = pick(rng);
            }
            s.local_search();
            const double len = s.length();
            if (len < best_len - Search::kEps) {
                best = s;
                best_len = len;
            }
        }
    }
    if (m >= 8) {
        const int kicks = static_cast<int>(std::min<std::size_t>(10 * m, 200));
        for (int k = 0; k < kicks; ++k) {
            std::vector<std::size_t> cut(3);
            std::uniform_int_distribution<std::size_t> pick(1, m - 1);
            for (auto& c : cut) c = pick(rng);
            std::sort(cut.begin(), cut.end());
            if (cut[0] == cut[1] || cut[1] == cut[2]) continue;
            Search s = best;
            auto kick = [&](std::vector<std::size_t>& v) {
                std::vector<std::size_t> out(v.begin(), v.begin() + static_cast<long>(cut[0]));
                out.insert(out.end(), v.begin() + static_cast<long>(cut[2]), v.end());
                out.insert(out.end(), v.begin() + static_cast<long>(cut[1]), v.begin() + static_cast<long>(cut[2]));
                out.insert(out.end(), v.begin() + static_cast<long>(cut[0]), v.begin() + static_cast<long>(cut[1]));
                v = out;
            };
            kick(s.order);
            kick(s.choice);
            s.local_search();
            const double len = s.length();
            if (len < best_len - Search::kEps) {
                best = s;
                best_len = len;
            }
        }
    }

    tour.order = best.order;
    for (std::size_t k = 0; k < m; ++k) tour.viewpoints.push_back(best.at(k));
    tour.total_length = path_length(tour.viewpoints);
    return tour;
}

double brute_force_tour_length(const std::vector<Neighborhood>& nbs) {
    const std::size_t m = nbs.size();
    if (m <= 1) return 0.0;
    std::vector<std::size_t> perm(m);
    std::iota(perm.begin(), perm.end(), 0);
    double best = std::numeric_limits<double>::infinity();
    do {
        // Shortest path through the fixed order via dynamic programming over candidates.
        std::vector<double> cost(nbs[perm[0]].candidate_viewpoints.size(), 0.0);
        for (std::size_t k = 1; k < m; ++k) {
            const auto& prev = nbs[perm[k - 1]].candidate_viewpoints;
            const auto& cur = nbs[perm[k]].candidate_viewpoints;
            std::vector<double> next(cur.size(), std::numeric_limits<double>::infinity());
            for (std::size_t c = 0; c < cur.size(); ++c) {
                for (std::size_t p = 0; p < prev.size(); ++p) next[c] = std::min(next[c], cost[p] + (cur[c] - prev[p]).norm());
            }
            cost = std::move(next);
        }
        best = std::min(best, *std::min_element(cost.begin(), cost.end()));
    } while (std::next_permutation(perm.begin(), perm.end()));
    return best;
}

void write_tour_csv(const Tour& tour, const std::vector<Neighborhood>& nbs, std::ostream& out) {
    out << "# tour stops=" << tour.order.size() << " total_length_m=" << format_double(tour.total_length) << '\n';
    out << "stop,patch,x_m,y_m,z_m,leg_m\n";
    for (std::size_t k = 0; k < tour.order.size(); ++k) {
        const double leg = k == 0 ? 0.0 : (tour.viewpoints[k] - tour.viewpoints[k - 1]).norm();
        CsvRow row;
        row << static_cast<unsigned long>(k) << static_cast<unsigned long>(nbs[tour.order[k]].patch_index)
            << tour.viewpoints[k].x() << tour.viewpoints[k].y() << tour.viewpoints[k].z() << leg;
        out << row.str() << '\n';
    }
}

Tour read_tour_csv(std::istream& in) {
    Tour tour;
    std::string line;
    bool header = false;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        if (!header) {
            header = true;
            continue;
        }
        const auto c = split_csv_line(line);
        if (c.size() != 6) throw std::runtime_error("tour CSV row has " + std::to_string(c.size()) + " columns");
        tour.order.push_back(std::stoul(c[1]));
        tour.viewpoints.emplace_back(std::stod(c[2]), std::stod(c[3]), std::stod(c[4]));
    }
    tour.total_length = path_length(tour.viewpoints);
    return tour;
}

}  // namespace ppaview
