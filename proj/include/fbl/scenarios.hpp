#pragma once

// Reproducible experiments binding the modules together. Each scenario returns its
// metrics, pass/fail criteria and artifacts; serialisation is left to the caller.

#include <string>
#include <utility>
#include <vector>

#include "fbl/field_io.hpp"
#include "fbl/grid.hpp"

namespace fbl {

struct Criterion {
    std::string id;           // e.g. "AC-1"
    std::string description;
    bool pass = false;
};

struct Table {
    std::string name;  // file stem
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;
};

struct ScenarioResult {
    std::string kind;
    std::vector<std::string> anchors;  // the constructions the scenario exercises
    std::vector<std::pair<std::string, std::string>> parameters;
    std::vector<std::pair<std::string, double>> metrics;
    std::vector<std::pair<std::string, std::vector<double>>> series;
    std::vector<Criterion> criteria;
    std::vector<std::pair<std::string, ScalarField>> fields;
    std::vector<Table> tables;

    bool pass() const;
    double metric(const std::string& name) const;
};

/// Scenario kinds accepted by run_scenario.
const std::vector<std::string>& scenario_kinds();

/// Dispatches on the `kind` key. Unknown keys are rejected with a Config error.
ScenarioResult run_scenario(const Config& cfg);

/// Harmonic thin obstacle problem with data Re z^{3/2} at h = 1/n and 1/(2n).
/// Keys: n (128), tol (1e-10).
ScalarField model_solution(int n, double tol = 1e-10);
ScenarioResult model_recovery(const Config& cfg);

/// Frequency, Weiss and branch classification of the model solution and of Re z^{7/2}.
/// Keys: n (128), k (1.5), k0 (4), r_min (0.1), r_max (0.5), radii (8).
ScenarioResult frequency_scan(const Config& cfg);

/// Variable-coefficient thin obstacle solve, quasiconformal straightening and pullback.
/// Keys: n (256), beltrami_n (1024), beltrami_l (4), target_half_width (0.5), nonlinearity (hodograph).
ScenarioResult straighten(const Config& cfg);

/// Two-membrane solves with difference data eps Re z^{3/2} on three meshes.
/// Keys: nonlinearity (hodograph), eps (0.01), meshes (64, 128, 256), tol (1e-10).
ScenarioResult two_membrane_refinement(const Config& cfg);

/// Constructs the solution for a curve and runs the conformal hodograph on it.
/// Keys: curve (catenary), half_width (0.3), h (1/400), y_min (-0.05), y_max (0.15), radius (working).
ScenarioResult construct_boundary(const Config& cfg);

/// Two hodographs with the square-root scaling, energy identities and criticality for the
/// two-phase lagrangian. Keys: lambda_u (2), lambda_v (1), eps (0.1), meshes (128, 256).
ScenarioResult two_phase_hodograph_scenario(const Config& cfg);

}  // namespace fbl
