#include "tamq/hamiltonian.hpp"

#include <cmath>
#include <string>

#include "tamq/errors.hpp"

namespace tamq {

void HamiltonianSpec::validate() const {
  if (sites < 3) {
    throw ConfigError("HamiltonianSpec: sites must be >= 3, got " +
                      std::to_string(sites));
  }
  if (sites > 30) {
    throw ConfigError("HamiltonianSpec: sites > 30 not supported");
  }
  if (!std::isfinite(kappa) || !std::isfinite(field)) {
    throw ConfigError("HamiltonianSpec: couplings must be finite");
  }
}

HamiltonianOperator::HamiltonianOperator(HamiltonianSpec spec) : spec_(spec) {
  spec_.validate();
  const int L = spec_.sites;
  dim_ = std::size_t{1} << L;

  diagonal_.resize(static_cast<Eigen::Index>(dim_));
  for (std::size_t s = 0; s < dim_; ++s) {
    // sum_i sz_i = (#up - #down) = L - 2*popcount(s)
    const int zsum = L - 2 * popcount64(s);
    diagonal_[static_cast<Eigen::Index>(s)] = -spec_.field * zsum;
  }

  nn_masks_.reserve(L);
  nnn_masks_.reserve(L);
  for (int i = 0; i < L; ++i) {
    nn_masks_.push_back((std::uint64_t{1} << i) |
                        (std::uint64_t{1} << ((i + 1) % L)));
    nnn_masks_.push_back((std::uint64_t{1} << i) |
                         (std::uint64_t{1} << ((i + 2) % L)));
  }
}

void HamiltonianOperator::apply(const Vector& in, Vector& out) const {
  if (static_cast<std::size_t>(in.size()) != dim_) {
    throw NumericalError("HamiltonianOperator::apply: dimension mismatch");
  }
  out.resize(in.size());
  out.array() = diagonal_.array() * in.array();

  // sx_i sx_{i+1} flips bits {i, i+1}; matrix element -1.
  for (const std::uint64_t m : nn_masks_) {
    for (std::size_t s = 0; s < dim_; ++s) {
      out[static_cast<Eigen::Index>(s)] -=
          in[static_cast<Eigen::Index>(s ^ m)];
    }
  }
  // -kappa sx_i sx_{i+2} inside the overall minus sign gives +kappa.
  if (spec_.kappa != 0.0) {
    const double k = spec_.kappa;
    for (const std::uint64_t m : nnn_masks_) {
      for (std::size_t s = 0; s < dim_; ++s) {
        out[static_cast<Eigen::Index>(s)] +=
            k * in[static_cast<Eigen::Index>(s ^ m)];
      }
    }
  }
}

Vector HamiltonianOperator::apply(const Vector& in) const {
  Vector out;
  apply(in, out);
  return out;
}

Matrix HamiltonianOperator::dense() const {
  if (spec_.sites > kDenseMaxSites) {
    throw NumericalError(
        "HamiltonianOperator::dense: refusing L > " +
        std::to_string(kDenseMaxSites));
  }
  const auto n = static_cast<Eigen::Index>(dim_);
  Matrix H = Matrix::Zero(n, n);
  for (std::size_t s = 0; s < dim_; ++s) {
    const auto col = static_cast<Eigen::Index>(s);
    H(col, col) = diagonal_[col];
    for (const std::uint64_t m : nn_masks_) {
      H(static_cast<Eigen::Index>(s ^ m), col) -= 1.0;
    }
    for (const std::uint64_t m : nnn_masks_) {
      H(static_cast<Eigen::Index>(s ^ m), col) += spec_.kappa;
    }
  }
  return H;
}

Observable Observable::sigma_z_site(int site, int sites) {
  if (site < 0 || site >= sites) {
    throw ConfigError("sigma_z_site: site index out of range");
  }
  Observable o;
  o.kind_ = Kind::diag;
  o.dim_ = std::size_t{1} << sites;
  o.diag_.resize(static_cast<Eigen::Index>(o.dim_));
  for (std::size_t s = 0; s < o.dim_; ++s) {
    o.diag_[static_cast<Eigen::Index>(s)] =
        ((s >> site) & 1u) ? -1.0 : 1.0;
  }
  return o;
}

Observable Observable::sigma_z_total(int sites) {
  Observable o;
  o.kind_ = Kind::diag;
  o.dim_ = std::size_t{1} << sites;
  o.diag_.resize(static_cast<Eigen::Index>(o.dim_));
  for (std::size_t s = 0; s < o.dim_; ++s) {
    o.diag_[static_cast<Eigen::Index>(s)] = sites - 2 * popcount64(s);
  }
  return o;
}

Observable Observable::projector(Vector state) {
  Observable o;
  o.kind_ = Kind::projector;
  o.dim_ = static_cast<std::size_t>(state.size());
  o.state_ = std::move(state);
  return o;
}

Observable Observable::tam_hamiltonian(const HamiltonianSpec& spec) {
  Observable o;
  o.kind_ = Kind::hamiltonian;
  o.ham_ = std::make_shared<HamiltonianOperator>(spec);
  o.dim_ = o.ham_->dimension();
  return o;
}

void Observable::apply(const Vector& in, Vector& out) const {
  if (static_cast<std::size_t>(in.size()) != dim_) {
    throw NumericalError("Observable::apply: dimension mismatch");
  }
  switch (kind_) {
    case Kind::diag:
      out = diag_.array() * in.array();
      break;
    case Kind::projector:
      out = state_ * state_.dot(in);
      break;
    case Kind::hamiltonian:
      ham_->apply(in, out);
      break;
  }
}

Vector Observable::apply(const Vector& in) const {
  Vector out;
  apply(in, out);
  return out;
}

double Observable::expectation(const Vector& v) const {
  if (static_cast<std::size_t>(v.size()) != dim_) {
    throw NumericalError("Observable::expectation: dimension mismatch");
  }
  if (kind_ == Kind::diag) {
    return (diag_.array() * v.array().square()).sum();
  }
  if (kind_ == Kind::projector) {
    const double ov = state_.dot(v);
    return ov * ov;
  }
  return v.dot(ham_->apply(v));
}

double Observable::matrix_element(const Vector& u, const Vector& v) const {
  if (static_cast<std::size_t>(u.size()) != dim_ ||
      static_cast<std::size_t>(v.size()) != dim_) {
    throw NumericalError("Observable::matrix_element: dimension mismatch");
  }
  if (kind_ == Kind::diag) {
    return (diag_.array() * u.array() * v.array()).sum();
  }
  if (kind_ == Kind::projector) {
    return state_.dot(u) * state_.dot(v);
  }
  return u.dot(ham_->apply(v));
}

Vector cyclic_shift(const Vector& v, int sites, int shift) {
  const std::size_t dim = std::size_t{1} << sites;
  if (static_cast<std::size_t>(v.size()) != dim) {
    throw NumericalError("cyclic_shift: dimension mismatch");
  }
  shift = ((shift % sites) + sites) % sites;
  const std::uint64_t mask = dim - 1;
  Vector out(v.size());
  for (std::size_t s = 0; s < dim; ++s) {
    const std::uint64_t r =
        ((s << shift) | (s >> (sites - shift))) & mask;
    out[static_cast<Eigen::Index>(r)] = v[static_cast<Eigen::Index>(s)];
  }
  return out;
}

}  // namespace tamq
