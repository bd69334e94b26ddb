#include "privlr/federation.hpp"

#include <algorithm>
#include <set>
#include <string>

namespace privlr {

std::string_view to_string(Mechanism m) {
  switch (m) {
    case Mechanism::Noiseless:
      return "NOISELESS";
    case Mechanism::Ofpa:
      return "OFPA";
    case Mechanism::Ofaa:
      return "OFAA";
    case Mechanism::ParameterPerturbation:
      return "ALG1";
  }
  return "?";
}

void FederationConfig::validate() const {
  if (!(eta > 0.0)) throw InvalidArgument("FederationConfig: eta must be > 0");
  if (max_rounds < 1) throw InvalidArgument("FederationConfig: max_rounds must be >= 1");
  if (!(ofaa_clip_radius > 0.0)) throw InvalidArgument("FederationConfig: ofaa_clip_radius must be > 0");
  if (!(parameter_sensitivity > 0.0)) throw InvalidArgument("FederationConfig: parameter_sensitivity must be > 0");
  gd.validate();
}

namespace {

bool upload_less(const Upload* a, const Upload* b) {
  if (a->params.bias != b->params.bias) return a->params.bias < b->params.bias;
  for (Index i = 0; i < a->params.weights.size(); ++i) {
    const double x = a->params.weights(i);
    const double y = b->params.weights(i);
    if (x != y) return x < y;
  }
  return a->records < b->records;
}

}  // namespace

ModelParamsd weighted_average(std::span<const Upload> uploads) {
  if (uploads.empty()) throw InvalidArgument("weighted_average: no uploads");
  const Index d = uploads.front().params.dimension();
  double total = 0.0;
  for (const Upload& u : uploads) {
    if (u.params.dimension() != d) throw DimensionError(detail::mismatch_message("weighted_average", d, u.params.dimension()));
    if (u.records <= 0) throw InvalidArgument("weighted_average: upload sizes must be > 0");
    total += static_cast<double>(u.records);
  }

  std::vector<const Upload*> order;
  order.reserve(uploads.size());
  for (const Upload& u : uploads) order.push_back(&u);
  std::sort(order.begin(), order.end(), upload_less);

  Eigen::VectorXd reference = order.front()->params.stacked();
  for (const Upload* u : order) reference = reference.cwiseMin(u->params.stacked());

  Eigen::VectorXd offset = Eigen::VectorXd::Zero(d + 1);
  for (const Upload* u : order) {
    const double weight = static_cast<double>(u->records) / total;
    offset += weight * (u->params.stacked() - reference);
  }
  return ModelParamsd::FromStacked(reference + offset);
}

ModelParamsd local_train_round(const Party& party, const ModelParamsd& global, const FederationConfig& config,
                               NoiseSource& noise) {
  if (party.data.empty()) throw DataError("local_train_round: party " + std::to_string(party.id) + " has no records");
  check_dimensions(global, party.data, "local_train_round");

  switch (party.mechanism) {
    case Mechanism::Noiseless:
      return minimize(LogisticObjective<double>(party.data), global, config.gd);
    case Mechanism::Ofpa:
      return minimize(ofpa_perturb(party.data, config.budget, noise), global, config.gd);
    case Mechanism::Ofaa: {
      GdSettings gd = config.gd;
      gd.clip_radius = config.ofaa_clip_radius;
      const QuadraticObjective<double> quad =
          ofaa_perturb(build_quadratic_objective(party.data), config.budget, party.data.dimension(), noise);
      return minimize(quad, global, gd);
    }
    case Mechanism::ParameterPerturbation: {
      const ModelParamsd optimal = minimize(LogisticObjective<double>(party.data), global, config.gd);
      return perturb_params(optimal, config.parameter_sensitivity, config.budget, noise);
    }
  }
  throw InvalidArgument("local_train_round: unknown mechanism");
}

NoiseFactory seeded_noise(std::uint64_t root_seed) {
  return [root_seed](int party_id, int round) -> std::unique_ptr<NoiseSource> {
    return std::make_unique<LaplaceSampler>(
        derive_seed(root_seed, {static_cast<std::uint64_t>(party_id), static_cast<std::uint64_t>(round)}));
  };
}

FederationResult run_federation(std::span<const Party> parties, const FederationConfig& config) {
  return run_federation(parties, config, seeded_noise(config.root_seed));
}

FederationResult run_federation(std::span<const Party> parties, const FederationConfig& config,
                                const NoiseFactory& noise) {
  config.validate();
  if (parties.empty()) throw InvalidArgument("run_federation: no parties");
  const Index d = parties.front().data.dimension();
  std::set<int> ids;
  for (const Party& p : parties) {
    if (p.data.dimension() != d) throw DimensionError(detail::mismatch_message("run_federation", d, p.data.dimension()));
    if (!ids.insert(p.id).second) throw InvalidArgument("run_federation: duplicate party id " + std::to_string(p.id));
  }

  RoundState state{0, ModelParamsd::Zero(d), 0.0};
  FederationResult result;
  std::vector<Upload> uploads(parties.size());
  while (state.round < config.max_rounds) {
    for (std::size_t i = 0; i < parties.size(); ++i) {
      const std::unique_ptr<NoiseSource> source = noise(parties[i].id, state.round);
      uploads[i] = {local_train_round(parties[i], state.global, config, *source), parties[i].data.size()};
    }
    ModelParamsd next = weighted_average(uploads);
    state.last_delta = (next.stacked() - state.global.stacked()).norm();
    state.global = std::move(next);
    ++state.round;
    result.per_round_deltas.push_back(state.last_delta);
    if (state.last_delta <= config.eta) {
      result.converged = true;
      break;
    }
  }
  result.params = state.global;
  result.rounds_used = state.round;
  return result;
}

double budget_ledger(const FederationResult& result, double per_round_epsilon) {
  return static_cast<double>(result.rounds_used) * per_round_epsilon;
}

}  // namespace privlr
