#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "loghold/fields.hpp"
#include "loghold/flow.hpp"
#include "loghold/modcont.hpp"

namespace loghold {

/// Initial scalar data catalog. Every entry except sin_cos is radial about
/// `center` and cut off smoothly between cutoff/2 and cutoff.
struct InitialDataSpec {
  enum class Kind {
    zero,
    constant,        ///< theta0 = value
    abs_power,       ///< |x - c|^exponent
    log_holder_cap,  ///< min((log 1/|x - c|)^-exponent, 1)
    sin_cos,         ///< sin x1 cos x2
  };
  Kind kind = Kind::zero;
  double exponent = 0.5;
  double value = 1.0;
  Vec2 center{};
  double cutoff = 1.0;
};

std::string to_string(InitialDataSpec::Kind k);
InitialDataSpec::Kind initial_kind_from_string(const std::string& s);

/// Builds the analytic field. The known coefficient metadata is 1 for
/// abs_power / log_holder_cap (for the matching family) and 0 otherwise.
ScalarField make_initial_data(const InitialDataSpec& spec);

/// C-infinity step: 1 on [0, cutoff/2], 0 beyond cutoff.
double smooth_cutoff(double rho, double cutoff);

struct EstimatorSettings {
  std::vector<double> radii;
  SamplerSpec sampler;
  double plateau_tol = 1e-2;
};

struct TransportProblem {
  VelocityField u;
  ScalarField theta0;
  Vec2 x0;
  ModulusFamily modulus = ModulusFamily::log_holder(1.0);
  TimeGrid time{1.0, 1e-3};
  EstimatorSettings estimator;
};

struct PreservationRecord {
  double t = 0.0;
  Vec2 position;  ///< phi(x0, t)
  CoefficientEstimate estimate;
  double initial = 0.0;  ///< estimate at t = 0
  double gap = 0.0;      ///< |est(t) - est(0)| / max(est(0), eps)
  double mu = 1.0;       ///< Gronwall factor mu(t)
  double local_budget = 0.0;
  std::optional<double> lower_bound;  ///< holder families only
  std::optional<double> upper_bound;
  std::vector<double> sup_ratios;  ///< S(r_k) on the estimator radii
};

/// theta(x, t) = theta0(inverse_trajectory(u, x, t)).
double solve_theta(const TransportProblem& p, Vec2 x, double t);

/// Coefficient of theta(., t) at phi(x0, t), paired with the t = 0 estimate.
PreservationRecord transported_coefficient(const TransportProblem& p, double t);

/// Records at each output time; holder families carry the sandwich bounds.
std::vector<PreservationRecord> preservation_curve(const TransportProblem& p, std::span<const double> output_times);

void to_json(nlohmann::json& j, const PreservationRecord& r);
/// CSV with header "t,x1,x2,estimate,gap,lower_bound,upper_bound".
std::string preservation_csv(std::span<const PreservationRecord> records);

}  // namespace loghold
