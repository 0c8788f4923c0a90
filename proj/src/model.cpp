#include "tubekit/model.hpp"

#include "tubekit/error.hpp"

namespace tubekit {

double score_region(const ActionModel& model, std::span<const double> phi) {
    if (model.weights.size() != phi.size()) {
        throw InvalidInputError("score_region: feature dimension " + std::to_string(phi.size()) +
                                " does not match model dimension " + std::to_string(model.weights.size()));
    }
    double score = model.bias;
    for (std::size_t i = 0; i < phi.size(); ++i) {
        score += model.weights[i] * phi[i];
    }
    return score;
}

std::vector<std::pair<std::string, double>> score_vector(
    std::span<const ActionModel> models, std::span<const std::string> vocabulary,
    std::span<const double> phi) {
    std::vector<std::pair<std::string, double>> scores;
    scores.reserve(vocabulary.size());
    for (const std::string& action : vocabulary) {
        const ActionModel* found = nullptr;
        for (const ActionModel& m : models) {
            if (m.action == action) {
                if (found != nullptr) {
                    throw InvalidInputError("score_vector: more than one model for action '" + action + "'");
                }
                found = &m;
            }
        }
        if (found == nullptr) {
            throw InvalidInputError("score_vector: no model for action '" + action + "'");
        }
        scores.emplace_back(action, score_region(*found, phi));
    }
    return scores;
}

}  // namespace tubekit
