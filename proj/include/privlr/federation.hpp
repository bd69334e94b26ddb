#ifndef PRIVLR_FEDERATION_HPP
#define PRIVLR_FEDERATION_HPP

// In-process simulation of collaborative training: every party minimizes its
// own (possibly perturbed) objective starting from the current global
// parameters, and a server replaces the global parameters with the
// size-weighted average of the uploads. Rounds repeat until the global
// parameters move by at most eta (l2) or max_rounds is reached.

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string_view>
#include <vector>

#include "privlr/core_model.hpp"
#include "privlr/mechanisms.hpp"

namespace privlr {

enum class Mechanism {
  Noiseless,
  Ofpa,                   // objective perturbation
  Ofaa,                   // noisy Taylor coefficients
  ParameterPerturbation,  // train clean, then add Laplace noise to (w, alpha)
};

std::string_view to_string(Mechanism m);

struct Party {
  int id = 0;
  Datasetd data;
  Mechanism mechanism = Mechanism::Noiseless;
};

struct FederationConfig {
  PrivacyBudget budget{0.8};  // per round
  double eta = 1e-3;
  int max_rounds = 50;
  GdSettings gd;
  double ofaa_clip_radius = 10.0;
  double parameter_sensitivity = 4.0;
  std::uint64_t root_seed = 0;

  void validate() const;
};

struct RoundState {
  int round = 0;
  ModelParamsd global;
  double last_delta = 0.0;
};

struct FederationResult {
  ModelParamsd params;
  int rounds_used = 0;
  bool converged = false;
  std::vector<double> per_round_deltas;
};

struct Upload {
  ModelParamsd params;
  Index records = 0;
};

/// sum_i (n_i / sum_j n_j) params_i, for weights and bias alike.
///
/// The result is independent of upload order and exact on identical
/// uploads: terms are summed in a canonical order as offsets from the
/// componentwise minimum.
ModelParamsd weighted_average(std::span<const Upload> uploads);

/// One party's contribution to a round: builds the perturbed objective with
/// fresh noise from `noise` and minimizes it from `global`.
ModelParamsd local_train_round(const Party& party, const ModelParamsd& global, const FederationConfig& config,
                               NoiseSource& noise);

/// Supplies the noise source for (party id, round index).
using NoiseFactory = std::function<std::unique_ptr<NoiseSource>(int party_id, int round)>;

/// Laplace samplers seeded by derive_seed(root_seed, {party_id, round}).
NoiseFactory seeded_noise(std::uint64_t root_seed);

FederationResult run_federation(std::span<const Party> parties, const FederationConfig& config);

FederationResult run_federation(std::span<const Party> parties, const FederationConfig& config,
                                const NoiseFactory& noise);

/// Naive sequential-composition total: rounds_used * per_round_epsilon.
double budget_ledger(const FederationResult& result, double per_round_epsilon);

}  // namespace privlr

#endif  // PRIVLR_FEDERATION_HPP
