// Apache License, Version 2.0, refer to LICENSE.txt
#pragma once

#include <span>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "lsm/class_model.hpp"
#include "lsm/distance_model.hpp"
#include "lsm/eigen_model.hpp"
#include "lsm/samples.hpp"

namespace lsm {

/// Which model to fit, with its hyperparameters (K included).
struct ModelSpec {
  std::variant<DistanceHyper, ClassHyper, EigenHyper> hyper;

  std::string name() const {
    return std::visit(
        [](const auto& h) -> std::string {
          using H = std::decay_t<decltype(h)>;
          if constexpr (std::is_same_v<H, DistanceHyper>) return "distance";
          else if constexpr (std::is_same_v<H, ClassHyper>) return "class";
          else return "eigen";
        },
        hyper);
  }
  int K() const {
    return std::visit([](const auto& h) { return h.K; }, hyper);
  }
};

/// Hyperparameter defaults of the reference analyses for a model name.
inline ModelSpec default_model_spec(const std::string& model, int n_actors, int K) {
  if (K < 1) throw std::invalid_argument("K must be >= 1");
  if (model == "distance") return {default_distance_hyper(n_actors, K)};
  if (model == "class") {
    ClassHyper h;
    h.K = K;
    return {h};
  }
  if (model == "eigen") {
    EigenHyper h;
    h.K = K;
    return {h};
  }
  throw std::invalid_argument("unknown model '" + model + "'");
}

inline PosteriorSamples fit(const Network& net, const ModelSpec& spec, const McmcConfig& cfg) {
  return std::visit(
      [&](const auto& h) -> PosteriorSamples {
        using H = std::decay_t<decltype(h)>;
        if constexpr (std::is_same_v<H, DistanceHyper>) return fit_distance(net, h, cfg);
        else if constexpr (std::is_same_v<H, ClassHyper>) return fit_class(net, h, cfg);
        else return fit_eigen(net, h, cfg);
      },
      spec.hyper);
}

/// Linear predictor of every dyad for one stored row of `model`.
inline std::vector<double> logits_from_row(const std::string& model, std::span<const double> row, int n_actors,
                                           int K) {
  if (model == "distance") return distance_logits(distance_state_from_row(row, n_actors, K));
  if (model == "class") return class_logits(class_state_from_row(row, n_actors, K));
  if (model == "eigen") return eigen_logits(eigen_state_from_row(row, n_actors, K));
  throw std::invalid_argument("unknown model '" + model + "'");
}

}  // namespace lsm
