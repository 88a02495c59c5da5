// Copyright 2026 swbss authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "swbss/linalg.hpp"

#include <cmath>

#include "swbss/errors.hpp"

namespace swbss::linalg {

namespace {

bool finite(const Eigen::MatrixXcd& m) {
  return m.allFinite();
}

}  // namespace

double loading_epsilon(const Eigen::MatrixXcd& a, const LoadingPolicy& p) {
  if (a.rows() == 0) return 0.0;
  double mean_diag = a.diagonal().real().cwiseAbs().mean();
  if (mean_diag <= 0.0 || !std::isfinite(mean_diag)) {
    // Zero matrix: fall back to an absolute floor so the solve stays defined.
    mean_diag = 1.0;
  }
  return p.relative_floor * mean_diag;
}

Eigen::MatrixXcd hermitian_solve(const Eigen::MatrixXcd& a,
                                 const Eigen::MatrixXcd& b,
                                 const LoadingPolicy& p) {
  if (a.rows() != a.cols()) throw ConfigError("hermitian_solve: A not square");
  if (a.rows() != b.rows()) throw ConfigError("hermitian_solve: B incompatible");
  if (!finite(a) || !finite(b)) throw ConfigError("hermitian_solve: non-finite input");

  Eigen::MatrixXcd loaded = a;
  loaded.diagonal().array() += loading_epsilon(a, p);
  Eigen::LDLT<Eigen::MatrixXcd> ldlt(loaded.selfadjointView<Eigen::Lower>());
  Eigen::MatrixXcd x = ldlt.solve(b);
  if (!finite(x)) throw NumericalError("hermitian_solve: solve produced non-finite values");
  return x;
}

Eigen::MatrixXcd kron(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b) {
  Eigen::MatrixXcd out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

Eigen::VectorXcd vec(const Eigen::MatrixXcd& a) {
  return Eigen::Map<const Eigen::VectorXcd>(a.data(), a.size());
}

Eigen::MatrixXcd unvec(const Eigen::VectorXcd& a, int rows, int cols) {
  if (a.size() != static_cast<Eigen::Index>(rows) * cols) {
    throw ConfigError("unvec: size mismatch");
  }
  return Eigen::Map<const Eigen::MatrixXcd>(a.data(), rows, cols);
}

Eigen::VectorXcd max_gen_eigvec(const Eigen::MatrixXcd& sig,
                                const Eigen::MatrixXcd& noise,
                                const LoadingPolicy& p) {
  if (sig.rows() != sig.cols() || noise.rows() != noise.cols() ||
      sig.rows() != noise.rows()) {
    throw ConfigError("max_gen_eigvec: inputs must be square and same size");
  }
  if (!finite(sig) || !finite(noise)) {
    throw ConfigError("max_gen_eigvec: non-finite input");
  }

  Eigen::MatrixXcd loaded = noise;
  loaded.diagonal().array() += loading_epsilon(noise, p);
  Eigen::LLT<Eigen::MatrixXcd> llt(loaded.selfadjointView<Eigen::Lower>());
  if (llt.info() != Eigen::Success) {
    throw NumericalError("max_gen_eigvec: noise matrix not positive definite");
  }
  Eigen::MatrixXcd l = llt.matrixL();
  // Whiten: B = L^-1 Sig L^-H is Hermitian with the same eigenvalues as
  // noise^-1 sig; its top eigenvector u maps back through v = L^-H u.
  Eigen::MatrixXcd b = l.triangularView<Eigen::Lower>().solve(sig);
  b = l.triangularView<Eigen::Lower>().solve(b.adjoint().eval());
  b = 0.5 * (b + b.adjoint().eval());

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(b);
  if (es.info() != Eigen::Success) {
    throw NumericalError("max_gen_eigvec: eigensolver failed");
  }
  Eigen::VectorXcd u = es.eigenvectors().col(sig.rows() - 1);
  Eigen::VectorXcd v = l.adjoint().triangularView<Eigen::Upper>().solve(u);

  double nrm = v.norm();
  if (!(nrm > 0.0) || !std::isfinite(nrm)) {
    throw NumericalError("max_gen_eigvec: degenerate eigenvector");
  }
  v /= nrm;

  // Deterministic phase: largest-magnitude entry made real positive.
  Eigen::Index k = 0;
  v.cwiseAbs().maxCoeff(&k);
  cd pivot = v(k);
  if (std::abs(pivot) > 0.0) v *= std::conj(pivot) / std::abs(pivot);
  return v;
}

}  // namespace swbss::linalg
