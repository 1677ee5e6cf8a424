#include "lndm/stacked_system.hpp"

#include <cmath>
#include <sstream>

#include "lndm/error.hpp"

namespace lndm {

ModelData ModelData::subset(const std::vector<int>& keep) const {
  ModelData out;
  const auto n = static_cast<Eigen::Index>(keep.size());
  out.z.resize(n, z.cols());
  out.design.resize(n, design.cols());
  if (coords) out.coords = Eigen::MatrixXd(n, 2);
  for (Eigen::Index i = 0; i < n; ++i) {
    out.z.row(i) = z.row(keep[i]);
    out.design.row(i) = design.row(keep[i]);
    if (coords) out.coords->row(i) = coords->row(keep[i]);
  }
  out.design_names = design_names;
  out.reference = reference;
  return out;
}

void ModelData::validate() const {
  if (z.rows() < 1 || z.cols() < 1) throw DimensionError("model data: empty response");
  if (design.rows() != z.rows()) throw DimensionError("model data: design and response row counts differ");
  if (static_cast<Eigen::Index>(design_names.size()) != design.cols()) {
    throw DimensionError("model data: design names do not match design columns");
  }
  if (coords && (coords->rows() != z.rows() || coords->cols() != 2)) {
    throw DimensionError("model data: coordinates must be N x 2");
  }
  if (!z.allFinite() || !design.allFinite()) throw DomainError("model data: non-finite values");
}

Eigen::VectorXd stack_response(const Eigen::MatrixXd& z) {
  Eigen::VectorXd y(z.size());
  for (Eigen::Index d = 0; d < z.cols(); ++d) y.segment(d * z.rows(), z.rows()) = z.col(d);
  return y;
}

Eigen::MatrixXd unstack_response(const Eigen::VectorXd& y, Eigen::Index coordinates) {
  if (coordinates < 1 || y.size() % coordinates != 0) {
    throw DimensionError("unstack_response: length not divisible by coordinate count");
  }
  const Eigen::Index n = y.size() / coordinates;
  Eigen::MatrixXd z(n, coordinates);
  for (Eigen::Index d = 0; d < coordinates; ++d) z.col(d) = y.segment(d * n, n);
  return z;
}

const LatentBlock* LatentLayout::find(const std::string& name) const {
  for (const auto& b : blocks) {
    if (b.name == name) return &b;
  }
  return nullptr;
}

const LatentBlock& LatentLayout::at(const std::string& name) const {
  const auto* b = find(name);
  if (!b) throw IndexError("latent block '" + name + "' not present");
  return *b;
}

Eigen::Index beta_index(const ModelSpec& spec, int coordinates, Eigen::Index m, int d) {
  return shares_fixed_effects(spec.structure) ? m : m * coordinates + d;
}

LatentLayout make_layout(const ModelSpec& spec, const std::vector<std::string>& design_names,
                         Eigen::Index rows, int coordinates) {
  LatentLayout layout;
  const auto p = static_cast<Eigen::Index>(design_names.size());
  const bool shared_beta = shares_fixed_effects(spec.structure);
  const Eigen::Index n_beta = shared_beta ? p : p * coordinates;
  layout.blocks.push_back({"beta", 0, n_beta});
  for (Eigen::Index m = 0; m < p; ++m) {
    if (shared_beta) {
      layout.names.push_back(design_names[m]);
    } else {
      for (int d = 0; d < coordinates; ++d) {
        layout.names.push_back(design_names[m] + "[" + std::to_string(d + 1) + "]");
      }
    }
  }
  Eigen::Index offset = n_beta;
  if (spec.shared_effect) {
    layout.blocks.push_back({"shared", offset, rows});
    for (Eigen::Index n = 0; n < rows; ++n) layout.names.push_back("u[" + std::to_string(n + 1) + "]");
    offset += rows;
  }
  switch (spatial_kind(spec.structure)) {
    case SpatialKind::None:
      break;
    case SpatialKind::Shared:
    case SpatialKind::Proportional:
      layout.blocks.push_back({"omega", offset, rows});
      for (Eigen::Index n = 0; n < rows; ++n) layout.names.push_back("omega[" + std::to_string(n + 1) + "]");
      offset += rows;
      break;
    case SpatialKind::Replicated:
      for (int d = 0; d < coordinates; ++d) {
        const std::string name = "omega[" + std::to_string(d + 1) + "]";
        layout.blocks.push_back({name, offset, rows});
        for (Eigen::Index n = 0; n < rows; ++n) {
          layout.names.push_back("omega[" + std::to_string(d + 1) + "," + std::to_string(n + 1) + "]");
        }
        offset += rows;
      }
      break;
  }
  layout.size = offset;
  return layout;
}

void check_identifiability(const ModelData& data) {
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(data.design);
  qr.setThreshold(1e-10);
  if (qr.rank() == data.design.cols()) return;
  std::ostringstream msg;
  msg << "fixed effects are not identifiable: design has rank " << qr.rank() << " < " << data.design.cols()
      << "; aliased columns:";
  const auto perm = qr.colsPermutation().indices();
  for (Eigen::Index i = qr.rank(); i < data.design.cols(); ++i) msg << " '" << data.design_names[perm[i]] << "'";
  throw IdentifiabilityError(msg.str());
}

Eigen::MatrixXd StackedSystem::predictor_without_shared(const Eigen::VectorXd& x) const {
  Eigen::VectorXd xs = x;
  if (const auto* u = layout.find("shared")) xs.segment(u->offset, u->size).setZero();
  return unstack_response(A * xs, coordinates);
}

Eigen::MatrixXd predictor_without_shared(const ModelData& data, const ModelSpec& spec, const LatentLayout& layout,
                                         const Eigen::VectorXd& alpha, const Eigen::VectorXd& x) {
  if (x.size() != layout.size) throw DimensionError("predictor: latent vector has the wrong length");
  const Eigen::Index n = data.rows();
  const int k = data.coordinates();
  const Eigen::Index p = data.design.cols();
  Eigen::MatrixXd beta(p, k);
  for (Eigen::Index m = 0; m < p; ++m) {
    for (int d = 0; d < k; ++d) beta(m, d) = x[beta_index(spec, k, m, d)];
  }
  Eigen::MatrixXd eta = data.design * beta;
  switch (spatial_kind(spec.structure)) {
    case SpatialKind::None:
      break;
    case SpatialKind::Shared:
    case SpatialKind::Proportional: {
      const auto& b = layout.at("omega");
      for (int d = 0; d < k; ++d) eta.col(d) += alpha[d] * x.segment(b.offset, n);
      break;
    }
    case SpatialKind::Replicated:
      for (int d = 0; d < k; ++d) {
        const auto& b = layout.at("omega[" + std::to_string(d + 1) + "]");
        eta.col(d) += x.segment(b.offset, n);
      }
      break;
  }
  return eta;
}

StackedSystem build_system(const ModelData& data, const ModelSpec& spec, const ModelHyper& hyper) {
  data.validate();
  check_identifiability(data);
  const Eigen::Index n = data.rows();
  const int k = data.coordinates();
  const Eigen::Index p = data.design.cols();
  const SpatialKind kind = spatial_kind(spec.structure);
  if (hyper.sigma2.size() != k) throw DimensionError("build_system: sigma2 has wrong length");
  if (kind != SpatialKind::None) {
    if (!data.coords) {
      throw InputError("structure " + to_string(spec.structure) + " needs coordinates");
    }
    if (!hyper.spatial) throw InputError("build_system: spatial hyperparameters missing");
  }

  StackedSystem sys;
  sys.rows = n;
  sys.coordinates = k;
  sys.hyper = hyper;
  sys.layout = make_layout(spec, data.design_names, n, k);
  sys.y = stack_response(data.z);
  const Eigen::Index size = sys.layout.size;

  sys.obs_precision.resize(n * k);
  for (int d = 0; d < k; ++d) sys.obs_precision.segment(d * n, n).setConstant(1.0 / hyper.sigma2[d]);

  const LatentBlock* shared = sys.layout.find("shared");
  std::vector<Eigen::Triplet<double>> a;
  a.reserve(static_cast<std::size_t>(n * k * (p + 2)));
  for (int d = 0; d < k; ++d) {
    for (Eigen::Index i = 0; i < n; ++i) {
      const Eigen::Index row = d * n + i;
      for (Eigen::Index m = 0; m < p; ++m) a.emplace_back(row, beta_index(spec, k, m, d), data.design(i, m));
      if (shared) a.emplace_back(row, shared->offset + i, 1.0);
      switch (kind) {
        case SpatialKind::None:
          break;
        case SpatialKind::Shared:
          a.emplace_back(row, sys.layout.at("omega").offset + i, 1.0);
          break;
        case SpatialKind::Proportional:
          a.emplace_back(row, sys.layout.at("omega").offset + i, hyper.alpha[d]);
          break;
        case SpatialKind::Replicated:
          a.emplace_back(row, sys.layout.at("omega[" + std::to_string(d + 1) + "]").offset + i, 1.0);
          break;
      }
    }
  }
  sys.A.resize(n * k, size);
  sys.A.setFromTriplets(a.begin(), a.end());

  // prior
  const LatentBlock& beta = sys.layout.at("beta");
  const auto& pr = spec.priors;
  if (!pr.beta_means.empty() && static_cast<Eigen::Index>(pr.beta_means.size()) != beta.size) {
    throw InputError("priors.beta_means must have one entry per fixed effect (" + std::to_string(beta.size) + ")");
  }
  if (!pr.beta_variances.empty() && static_cast<Eigen::Index>(pr.beta_variances.size()) != beta.size) {
    throw InputError("priors.beta_variances must have one entry per fixed effect (" + std::to_string(beta.size) +
                     ")");
  }
  sys.prior_mean = Eigen::VectorXd::Zero(size);
  std::vector<Eigen::Triplet<double>> b;
  double log_det = 0.0;
  for (Eigen::Index j = 0; j < beta.size; ++j) {
    const double var = pr.beta_variances.empty() ? pr.beta_variance : pr.beta_variances[j];
    sys.prior_mean[j] = pr.beta_means.empty() ? pr.beta_mean : pr.beta_means[j];
    b.emplace_back(j, j, 1.0 / var);
    log_det -= std::log(var);
  }
  if (shared) {
    if (!(hyper.gamma > 0.0)) throw DomainError("build_system: gamma must be positive with a shared effect");
    for (Eigen::Index i = 0; i < n; ++i) b.emplace_back(shared->offset + i, shared->offset + i, 1.0 / hyper.gamma);
    log_det -= static_cast<double>(n) * std::log(hyper.gamma);
    if (spec.sum_to_zero) {
      sys.constraint = Eigen::VectorXd::Zero(size);
      sys.constraint.segment(shared->offset, n).setOnes();
      sys.constraint_prior_variance = static_cast<double>(n) * hyper.gamma;
    }
  }
  if (kind != SpatialKind::None) {
    auto field = std::make_shared<MaternField>(*data.coords, *hyper.spatial);
    const int blocks = kind == SpatialKind::Replicated ? k : 1;
    const Eigen::Index offset = sys.layout.blocks.back().offset - (blocks - 1) * n;
    for (int blk = 0; blk < blocks; ++blk) {
      const Eigen::Index base = offset + blk * n;
      for (Eigen::Index j = 0; j < n; ++j) {
        for (Eigen::Index i = 0; i < n; ++i) b.emplace_back(base + i, base + j, field->precision()(i, j));
      }
    }
    log_det -= static_cast<double>(blocks) * field->log_det_cov();
    sys.field_jittered = field->jittered();
    sys.field = std::move(field);
  }
  sys.prior_precision.resize(size, size);
  sys.prior_precision.setFromTriplets(b.begin(), b.end());
  sys.log_det_prior_precision = log_det;
  return sys;
}

}  // namespace lndm
