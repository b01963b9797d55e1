#include "covertsim/cone_program.hpp"

#include <cmath>
#include <fstream>
#include <ostream>
#include <stdexcept>

namespace covertsim {

int cone_vec_len(const ConeBlock& b) {
  if (b.kind == ConeKind::psd) return b.size * (b.size + 1) / 2;
  return b.size;
}

const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::optimal: return "optimal";
    case SolveStatus::infeasible: return "infeasible";
    case SolveStatus::unbounded: return "unbounded";
    case SolveStatus::max_iters: return "max_iters";
  }
  return "unknown";
}

ConeProgram::ConeProgram(std::vector<ConeBlock> cones) : cones_(std::move(cones)) {
  offsets_.reserve(cones_.size());
  for (const auto& blk : cones_) {
    if (blk.size < 1) throw std::invalid_argument("cone block size must be >= 1");
    offsets_.push_back(var_dim_);
    var_dim_ += cone_vec_len(blk);
  }
  c_ = Eigen::VectorXd::Zero(var_dim_);
}

void ConeProgram::set_objective(const Eigen::VectorXd& c) {
  if (c.size() != var_dim_)
    throw std::invalid_argument("objective dimension mismatch");
  c_ = c;
}

int ConeProgram::add_row(std::vector<std::pair<int, double>> entries, double rhs) {
  for (const auto& [idx, val] : entries) {
    if (idx < 0 || idx >= var_dim_)
      throw std::invalid_argument("row entry index out of range");
    (void)val;
  }
  rows_.push_back(std::move(entries));
  b_.push_back(rhs);
  return static_cast<int>(rows_.size()) - 1;
}

const Eigen::VectorXd ConeProgram::rhs() const {
  return Eigen::Map<const Eigen::VectorXd>(b_.data(), static_cast<long>(b_.size()));
}

Eigen::MatrixXd ConeProgram::dense_matrix() const {
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(num_rows(), var_dim_);
  for (int i = 0; i < num_rows(); ++i)
    for (const auto& [idx, val] : rows_[i]) a(i, idx) += val;
  return a;
}

Eigen::VectorXd ConeProgram::apply(const Eigen::VectorXd& x) const {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(num_rows());
  for (int i = 0; i < num_rows(); ++i) {
    double acc = 0.0;
    for (const auto& [idx, val] : rows_[i]) acc += val * x(idx);
    out(i) = acc;
  }
  return out;
}

Eigen::VectorXd ConeProgram::apply_transpose(const Eigen::VectorXd& y) const {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(var_dim_);
  for (int i = 0; i < num_rows(); ++i) {
    const double yi = y(i);
    if (yi == 0.0) continue;
    for (const auto& [idx, val] : rows_[i]) out(idx) += val * yi;
  }
  return out;
}

void ConeProgram::dump(std::ostream& os) const {
  os << "coneprogram v1\n";
  os << "vars " << var_dim_ << "\n";
  os << "rows " << num_rows() << "\n";
  os << "blocks " << cones_.size() << "\n";
  for (const auto& blk : cones_) {
    const char* kind = "";
    switch (blk.kind) {
      case ConeKind::nonneg: kind = "nonneg"; break;
      case ConeKind::soc: kind = "soc"; break;
      case ConeKind::psd: kind = "psd"; break;
      case ConeKind::free_var: kind = "free"; break;
    }
    os << kind << " " << blk.size << "\n";
  }
  os.precision(17);
  os << "c";
  for (int i = 0; i < var_dim_; ++i) os << " " << c_(i);
  os << "\nb";
  for (double v : b_) os << " " << v;
  os << "\nA\n";
  const Eigen::MatrixXd a = dense_matrix();
  for (int i = 0; i < a.rows(); ++i) {
    for (int j = 0; j < a.cols(); ++j) os << (j ? " " : "") << a(i, j);
    os << "\n";
  }
}

void ConeProgram::dump_file(const std::string& path) const {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot open dump file: " + path);
  dump(f);
}

}  // namespace covertsim
