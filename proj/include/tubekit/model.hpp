#pragma once

#include <span>
#include <string>
#include <utility>
#include <vector>

namespace tubekit {

// Per-action linear classifier over fused features: confidence is
// weights . phi + bias. A zero bias recovers the plain dot product.
struct ActionModel {
    std::string action;
    std::vector<double> weights;
    double bias = 0.0;

    bool operator==(const ActionModel&) const = default;
};

// weights . phi + bias. Dimension mismatch throws InvalidInputError.
double score_region(const ActionModel& model, std::span<const double> phi);

// One score per vocabulary action, in vocabulary order. Every action must
// be covered by exactly one model.
std::vector<std::pair<std::string, double>> score_vector(
    std::span<const ActionModel> models, std::span<const std::string> vocabulary,
    std::span<const double> phi);

}  // namespace tubekit
