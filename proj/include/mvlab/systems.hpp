#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mvlab/dynamics.hpp"
#include "mvlab/lyapunov.hpp"

namespace mvlab {

// A fully wired example system: coefficients, Lyapunov data, certificate,
// and the closed forms its proof derives. Closed-form evaluators are
// validated against the generic generators at registration.
struct NamedSystem {
    std::string name;
    std::string description;
    CoefficientField field;
    std::optional<CoefficientField> bar_field;
    LyapunovFunctional V;
    std::optional<TwoPointFunction> V2;
    Certificate certificate;
    std::map<std::string, std::string> closed_forms;  // label -> printable expression
    std::vector<std::string> citations;

    // Numeric closed forms backing the printable ones; null when absent.
    std::function<double(const Vec&, const EmpiricalMeasure&)> generator_exact;
    std::function<double(const Vec&, const Vec&, const EmpiricalMeasure&, const EmpiricalMeasure&)>
        two_point_exact;
    std::function<double(const Vec&, const Vec&, const EmpiricalMeasure&, const EmpiricalMeasure&)>
        two_point_bar_exact;
};

// Registry lookup; throws std::invalid_argument listing valid names for an
// unknown one. The registry is built once and immutable afterwards.
const NamedSystem& builtin(const std::string& name);
std::vector<std::string> builtin_names();

}  // namespace mvlab
