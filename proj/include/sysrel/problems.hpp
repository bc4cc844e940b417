#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "sysrel/input_model.hpp"

namespace sysrel {

/// Limit state of one component, evaluated on its own input sub-vector.
using ComponentFunction = std::function<double(const Eigen::VectorXd&)>;

struct ProblemSpec {
    std::string name;
    InputModel model;
    std::vector<std::string> component_ids;
    std::vector<ComponentFunction> limit_states;
    std::string composition;
    std::optional<double> reference_pf;

    std::optional<double> reference_beta() const;
    /// Throws std::invalid_argument when the parts do not fit together.
    void validate() const;
};

/// Series system of four limit states in two standard-normal inputs, parameterized by P.
ProblemSpec four_branch(double p);

/// Roof truss with eight lognormal inputs and three limit states (deflection,
/// concrete bar, steel bar).
ProblemSpec roof_truss();

/// Seven-tower transmission line. Not available: it needs a finite-element model and
/// dependent inputs; calling this throws std::invalid_argument explaining why.
ProblemSpec transmission_tower();

/// Problem by name ("four_branch", "roof_truss"); numeric parameters such as P go in `params`.
ProblemSpec builtin_problem(const std::string& name, const std::map<std::string, double>& params = {});

/// Single component limit state by id, e.g. "four_branch.g3" (params: P) or "roof_truss.g2".
ComponentFunction builtin_component(const std::string& id, const std::map<std::string, double>& params = {});

/// Component-space dimension of a builtin component.
std::size_t builtin_component_dimension(const std::string& id);

std::vector<std::string> builtin_problem_names();
std::vector<std::string> builtin_component_names();

}  // namespace sysrel
