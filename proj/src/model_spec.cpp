#include "lndm/model_spec.hpp"

#include <cmath>
#include <set>
#include <sstream>

#include "lndm/error.hpp"

namespace lndm {

namespace {

constexpr double kLog2Pi = 1.8378770664093454836;

std::string indexed(const std::string& base, int d) { return base + "[" + std::to_string(d) + "]"; }

void check_pc(const PcPrior& p, const std::string& what) {
  if (!(p.u > 0.0)) throw InputError(what + ": PC prior u must be positive");
  if (!(p.alpha > 0.0 && p.alpha < 1.0)) throw InputError(what + ": PC prior alpha must be in (0, 1)");
}

}  // namespace

bool shares_fixed_effects(StructureType t) { return static_cast<int>(t) % 2 == 1; }

SpatialKind spatial_kind(StructureType t) {
  switch (t) {
    case StructureType::I:
    case StructureType::II:
      return SpatialKind::None;
    case StructureType::III:
    case StructureType::IV:
      return SpatialKind::Shared;
    case StructureType::V:
    case StructureType::VI:
      return SpatialKind::Proportional;
    case StructureType::VII:
    case StructureType::VIII:
      return SpatialKind::Replicated;
  }
  return SpatialKind::None;
}

std::string to_string(StructureType t) {
  static const char* names[] = {"I", "II", "III", "IV", "V", "VI", "VII", "VIII"};
  return names[static_cast<int>(t) - 1];
}

StructureType parse_structure(const std::string& s) {
  static const char* names[] = {"I", "II", "III", "IV", "V", "VI", "VII", "VIII"};
  std::string key = s;
  if (key.rfind("Type ", 0) == 0) key = key.substr(5);
  for (int i = 0; i < 8; ++i) {
    if (key == names[i] || key == std::to_string(i + 1)) return static_cast<StructureType>(i + 1);
  }
  throw InputError("unknown structure type '" + s + "' (expected I..VIII)");
}

void PriorSpec::validate() const {
  if (!(beta_variance > 0.0)) throw InputError("priors: beta_variance must be positive");
  for (double v : beta_variances) {
    if (!(v > 0.0)) throw InputError("priors: beta_variances must be positive");
  }
  for (const auto& p : sigma) check_pc(p, "priors.sigma");
  check_pc(sqrt_gamma, "priors.sqrt_gamma");
  check_pc(sigma_omega, "priors.sigma_omega");
  if (!(range.alpha0 > 0.0 && range.alpha0 < 1.0)) throw InputError("priors.range: alpha0 must be in (0, 1)");
  if (!(alpha_variance > 0.0)) throw InputError("priors: alpha_variance must be positive");
}

void ModelSpec::validate() const {
  priors.validate();
  if (reference < 0) throw InputError("model: reference must be >= 0 (0 = automatic)");
  if (!(smoothness > 0.0)) throw InputError("model: smoothness must be positive");
  std::set<std::string> seen;
  for (const auto& c : covariates) {
    if (!seen.insert(c).second) throw InputError("model: duplicate covariate '" + c + "'");
  }
}

double pc_prec_logprior(double sigma, double u, double alpha) {
  if (!(sigma > 0.0)) {
    std::ostringstream msg;
    msg << "pc_prec_logprior: sigma must be positive, got " << sigma;
    throw DomainError(msg.str());
  }
  const double lambda = -std::log(alpha) / u;
  return std::log(lambda) - lambda * sigma;
}

double pc_range_logprior(double range, double range0, double alpha0) {
  if (!(range > 0.0)) throw DomainError("pc_range_logprior: range must be positive");
  const double lambda = -range0 * std::log(alpha0);
  return std::log(lambda) - 2.0 * std::log(range) - lambda / range;
}

HyperSpace::HyperSpace(const ModelSpec& spec, int coordinates, double range0_default)
    : spec_(spec), coordinates_(coordinates) {
  spec.validate();
  if (coordinates < 1) throw DimensionError("hyperparameters: need at least one alr coordinate");
  if (!spec.priors.sigma.empty() && static_cast<int>(spec.priors.sigma.size()) != coordinates) {
    throw InputError("priors.sigma must list one PC prior per alr coordinate");
  }
  range0_ = spec.priors.range.range0 > 0.0 ? spec.priors.range.range0 : range0_default;

  for (int d = 1; d <= coordinates; ++d) {
    params_.push_back({indexed("log_prec", d), indexed("sigma2", d), HyperKind::LikelihoodPrecision, d});
  }
  if (spec.shared_effect) {
    params_.push_back({"log_prec_gamma", "gamma", HyperKind::SharedPrecision, 0});
  }
  const SpatialKind kind = spatial_kind(spec.structure);
  if (kind != SpatialKind::None) {
    if (!(range0_ > 0.0)) throw InputError("hyperparameters: range prior needs a positive range0");
    params_.push_back({"log_prec_omega", "sigma_omega", HyperKind::FieldPrecision, 0});
    params_.push_back({"log_range", "range", HyperKind::Range, 0});
  }
  if (kind == SpatialKind::Proportional) {
    for (int d = 2; d <= coordinates; ++d) {
      params_.push_back({indexed("alpha", d), indexed("alpha", d), HyperKind::Proportionality, d});
    }
  }

  std::set<std::string> known;
  for (auto& p : params_) known.insert(p.user_name);
  for (const auto& [name, value] : spec.fixed) {
    if (!known.count(name)) {
      throw InputError("model.fixed: '" + name + "' is not a hyperparameter of structure " +
                       to_string(spec.structure));
    }
  }
  for (std::size_t i = 0; i < params_.size(); ++i) {
    auto& p = params_[i];
    auto it = spec.fixed.find(p.user_name);
    if (it != spec.fixed.end()) {
      p.fixed = true;
      p.fixed_internal = to_internal_value(p, it->second);
    } else {
      free_index_.push_back(static_cast<int>(i));
    }
  }
}

double HyperSpace::to_user(const HyperParam& p, double internal) {
  switch (p.kind) {
    case HyperKind::LikelihoodPrecision:
    case HyperKind::SharedPrecision:
      return std::exp(-internal);  // variance
    case HyperKind::FieldPrecision:
      return std::exp(-0.5 * internal);  // standard deviation
    case HyperKind::Range:
      return std::exp(internal);
    case HyperKind::Proportionality:
      return internal;
  }
  return internal;
}

double HyperSpace::to_internal_value(const HyperParam& p, double user) {
  switch (p.kind) {
    case HyperKind::LikelihoodPrecision:
    case HyperKind::SharedPrecision:
    case HyperKind::FieldPrecision:
    case HyperKind::Range:
      if (!(user > 0.0)) throw DomainError("hyperparameter " + p.user_name + " must be positive");
      break;
    case HyperKind::Proportionality:
      break;
  }
  switch (p.kind) {
    case HyperKind::LikelihoodPrecision:
    case HyperKind::SharedPrecision:
      return -std::log(user);
    case HyperKind::FieldPrecision:
      return -2.0 * std::log(user);
    case HyperKind::Range:
      return std::log(user);
    case HyperKind::Proportionality:
      return user;
  }
  return user;
}

double HyperSpace::user_value(const HyperParam& p, const ModelHyper& h) {
  switch (p.kind) {
    case HyperKind::LikelihoodPrecision:
      return h.sigma2[p.coordinate - 1];
    case HyperKind::SharedPrecision:
      return h.gamma;
    case HyperKind::FieldPrecision:
      return h.spatial->sigma_omega;
    case HyperKind::Range:
      return h.spatial->range;
    case HyperKind::Proportionality:
      return h.alpha[p.coordinate - 1];
  }
  return 0.0;
}

ModelHyper HyperSpace::to_model(const Eigen::VectorXd& theta) const {
  if (theta.size() != free_dim()) {
    throw DimensionError("hyperparameter vector has length " + std::to_string(theta.size()) + ", expected " +
                         std::to_string(free_dim()));
  }
  ModelHyper h;
  h.sigma2 = Eigen::VectorXd::Ones(coordinates_);
  h.alpha = Eigen::VectorXd::Ones(coordinates_);
  if (spatial_kind(spec_.structure) != SpatialKind::None) {
    h.spatial = SpatialHyper{1.0, 1.0, spec_.smoothness};
  }
  int free = 0;
  for (const auto& p : params_) {
    const double internal = p.fixed ? p.fixed_internal : theta[free++];
    const double user = to_user(p, internal);
    switch (p.kind) {
      case HyperKind::LikelihoodPrecision:
        h.sigma2[p.coordinate - 1] = user;
        break;
      case HyperKind::SharedPrecision:
        h.gamma = user;
        break;
      case HyperKind::FieldPrecision:
        h.spatial->sigma_omega = user;
        break;
      case HyperKind::Range:
        h.spatial->range = user;
        break;
      case HyperKind::Proportionality:
        h.alpha[p.coordinate - 1] = user;
        break;
    }
  }
  return h;
}

Eigen::VectorXd HyperSpace::to_internal(const ModelHyper& h) const {
  Eigen::VectorXd theta(free_dim());
  for (int i = 0; i < free_dim(); ++i) {
    const auto& p = free_param(i);
    theta[i] = to_internal_value(p, user_value(p, h));
  }
  return theta;
}

double HyperSpace::param_log_prior(const HyperParam& p, double internal) const {
  switch (p.kind) {
    case HyperKind::LikelihoodPrecision:
    case HyperKind::SharedPrecision:
    case HyperKind::FieldPrecision: {
      // prior is on the standard deviation sigma = exp(-internal / 2)
      const PcPrior& pc = p.kind == HyperKind::SharedPrecision ? spec_.priors.sqrt_gamma
                          : p.kind == HyperKind::FieldPrecision
                              ? spec_.priors.sigma_omega
                              : (spec_.priors.sigma.empty() ? PcPrior{} : spec_.priors.sigma[p.coordinate - 1]);
      const double sd = std::exp(-0.5 * internal);
      return pc_prec_logprior(sd, pc.u, pc.alpha) + std::log(0.5 * sd);
    }
    case HyperKind::Range: {
      const double range = std::exp(internal);
      return pc_range_logprior(range, range0_, spec_.priors.range.alpha0) + internal;
    }
    case HyperKind::Proportionality: {
      const double v = spec_.priors.alpha_variance;
      const double r = internal - spec_.priors.alpha_mean;
      return -0.5 * (kLog2Pi + std::log(v) + r * r / v);
    }
  }
  return 0.0;
}

double HyperSpace::log_prior(const Eigen::VectorXd& theta) const {
  double lp = 0.0;
  for (int i = 0; i < free_dim(); ++i) lp += param_log_prior(free_param(i), theta[i]);
  return lp;
}

}  // namespace lndm
