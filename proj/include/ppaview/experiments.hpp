#pragma once

#include <filesystem>
#include <memory>
#include <ostream>
#include <string>
#include <vector>

#include "ppaview/evaluation.hpp"
#include "ppaview/planner.hpp"
#include "ppaview/scenario.hpp"
#include "ppaview/tspn.hpp"

namespace ppaview {

/// Sphere sample around the actor center of the scenario's first pose,
/// correlated against a render of the mesh placed at that pose.
CorrelationStudy run_correlation(const Scenario& sc);

/// Writes correlation.csv and summary.txt into `out_dir`; a warning goes to
/// `log` when a coefficient is undefined.
CorrelationStudy cmd_correlate(const Scenario& sc, const std::filesystem::path& out_dir, std::ostream& log);

/// Ground-truth estimator, or the scenario's noisy estimator when `noisy`.
std::unique_ptr<ActorEstimator> make_estimator(const Scenario& sc, bool noisy);

/// Scorer used by the enumeration baselines, or an empty function for the
/// other planners.
ViewScorer make_view_scorer(const Scenario& sc, PlannerKind kind, const PointCloud& gt_local);

/// Area-uniform samples of the actor mesh in its local frame.
PointCloud sample_ground_truth(const Scenario& sc, const TriangleMesh& local_mesh);

struct PlanEvaluation {
    double coverage_pct{0};
    double chamfer_mm{0};
    std::size_t windows{0};
    std::vector<PointCloud> merged;  // one per window, in the window's first-frame world
};

/// Renders each frame at the executed pose, compensates the actor's motion
/// to the first frame of its window, merges windows and scores each merged
/// cloud against the mesh and surface sample at that first frame.
PlanEvaluation evaluate_plan(const Scenario& sc, const ActorSequence& seq, const PlanRun& run,
                             const PointCloud& gt_local);

struct PlanTableRow {
    PlannerKind kind{PlannerKind::no_plan};
    bool noisy{false};
    PlanRun run;
    PlanEvaluation eval;
};

/// Runs each planner on the scenario, optionally with the noise protocol.
std::vector<PlanTableRow> run_planners(const Scenario& sc, const std::vector<PlannerKind>& kinds, bool noisy);

/// Runs every planner without and with noise; writes table.csv plus one
/// run CSV and the merged clouds per planner and condition.
std::vector<PlanTableRow> cmd_plan(const Scenario& sc, const std::vector<PlannerKind>& kinds,
                                   const std::filesystem::path& out_dir, std::ostream& log);

void write_plan_table(const Scenario& sc, const std::vector<PlanTableRow>& rows, std::ostream& out);

/// Patches the tour visits: the five cuboid faces at the first pose, or the
/// mesh triangles.
std::vector<Patch> tour_patches(const Scenario& sc);

struct TourResult {
    std::vector<Patch> patches;
    std::vector<Neighborhood> neighborhoods;
    Tour tour;
};

TourResult run_tour(const Scenario& sc, double c_threshold);
TourResult cmd_tour(const Scenario& sc, double c_threshold, const std::filesystem::path& out_dir, std::ostream& log);

/// Summarizes a plan or tour CSV (detected from its header). Returns the
/// number of constraint violations found (plans) or 0.
int cmd_replay(const std::filesystem::path& csv, std::ostream& out);

}  // namespace ppaview
