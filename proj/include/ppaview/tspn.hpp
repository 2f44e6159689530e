#pragma once

#include <cstdint>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <vector>

#include "ppaview/geometry.hpp"

namespace ppaview {

class InfeasibleThresholdError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

struct Neighborhood {
    std::size_t patch_index{0};
    std::vector<Vec3> candidate_viewpoints;
};

struct Tour {
    std::vector<std::size_t> order;   // indices into the neighborhood list
    std::vector<Vec3> viewpoints;     // chosen viewpoint per stop, in visit order
    double total_length{0};           // open path, no return leg
    double construction_length{0};    // best nearest-neighbour tour before improvement
};

/// Viewpoints r with ppa_constrained(r, patch) >= c_threshold and
/// |r - centroid| >= r_safe. The first candidate is always the point on the
/// normal at distance r_safe; the rest come from rejection sampling inside
/// the ball {ppa_constrained >= C}. Throws InfeasibleThresholdError when
/// c_threshold > 1 / r_safe.
Neighborhood build_neighborhood(const Patch& patch, std::size_t patch_index, double c_threshold, double r_safe,
                                int samples, std::uint64_t seed);

bool viewpoint_feasible(const Vec3& viewpoint, const Patch& patch, double c_threshold, double r_safe,
                        double tol = 1e-9);

double path_length(const std::vector<Vec3>& points);

/// Nearest-neighbour construction from every start, then 2-opt, or-opt and
/// per-stop candidate re-selection until no move improves, plus a few seeded
/// double-bridge restarts. Throws std::invalid_argument on an empty
/// neighbourhood.
Tour solve_tour(const std::vector<Neighborhood>& neighborhoods, std::uint64_t seed);

/// Exhaustive search over visit orders (with every candidate combination);
/// only practical for a handful of stops.
double brute_force_tour_length(const std::vector<Neighborhood>& neighborhoods);

void write_tour_csv(const Tour& tour, const std::vector<Neighborhood>& neighborhoods, std::ostream& out);
Tour read_tour_csv(std::istream& in);

}  // namespace ppaview
