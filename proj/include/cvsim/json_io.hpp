#pragma once

#include <json.hpp>

#include "cvsim/circuit.hpp"
#include "cvsim/config.hpp"

// JSON forms of the circuit records. Timing fields are the only
// non-reproducible content; everything else is a pure function of the config.

namespace cvsim {

inline nlohmann::ordered_json circuit_config_json(const CircuitConfig& cfg) {
  nlohmann::ordered_json j;
  j["L"] = cfg.sites;
  j["T"] = cfg.steps;
  j["p"] = cfg.measure_prob;
  j["channel"] = cfg.channel == ChannelKind::VacuumProjection ? "vacuum-projection"
                                                              : "beta-gate";
  j["beta"] = cfg.beta;
  j["parity"] = parity_name(cfg.parity);
  j["seed"] = cfg.seed;
  j["cut"] = cfg.cut_size();
  return j;
}

inline nlohmann::ordered_json to_json(const TrajectoryRecord& rec) {
  nlohmann::ordered_json j;
  j["seed"] = rec.seed;
  j["first_parity"] = rec.first_parity == 0 ? "even" : "odd";
  j["config"] = circuit_config_json(rec.config);
  j["series"] = rec.series;
  j["wall_time_s"] = rec.wall_time_s;
  return j;
}

inline nlohmann::ordered_json to_json(const EnsembleSummary& s) {
  nlohmann::ordered_json j;
  j["n_traj"] = s.n_traj;
  j["count_even_first"] = s.count_even_first;
  j["count_odd_first"] = s.count_odd_first;
  j["mean_S2"] = s.mean;
  j["stderr"] = s.stderr_;
  return j;
}

}  // namespace cvsim
