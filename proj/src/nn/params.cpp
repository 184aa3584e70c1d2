#include "nodefeat/nn/params.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "nodefeat/error.hpp"

namespace nodefeat::nn {

void ParamSet::add(std::string name, Matrix value) {
  if (contains(name)) throw Error(ErrorKind::InvalidArgument, "duplicate parameter " + name);
  entries_.push_back({std::move(name), std::move(value)});
}

bool ParamSet::contains(std::string_view name) const {
  for (const auto& e : entries_) {
    if (e.name == name) return true;
  }
  return false;
}

std::size_t ParamSet::index_of(std::string_view name) const {
  for (std::size_t k = 0; k < entries_.size(); ++k) {
    if (entries_[k].name == name) return k;
  }
  throw Error(ErrorKind::InvalidArgument, "no parameter named " + std::string(name));
}

const Matrix& ParamSet::at(std::string_view name) const { return entries_[index_of(name)].value; }
Matrix& ParamSet::at(std::string_view name) { return entries_[index_of(name)].value; }

std::size_t ParamSet::total_entries() const {
  std::size_t total = 0;
  for (const auto& e : entries_) total += static_cast<std::size_t>(e.value.size());
  return total;
}

ParamSet ParamSet::zeros_like() const {
  ParamSet out;
  for (const auto& e : entries_) out.add(e.name, Matrix::Zero(e.value.rows(), e.value.cols()));
  return out;
}

bool ParamSet::same_layout(const ParamSet& other) const {
  if (other.size() != size()) return false;
  for (std::size_t k = 0; k < size(); ++k) {
    const auto& a = entries_[k];
    const auto& b = other.entries_[k];
    if (a.name != b.name || a.value.rows() != b.value.rows() || a.value.cols() != b.value.cols()) {
      return false;
    }
  }
  return true;
}

bool ParamSet::all_finite() const {
  for (const auto& e : entries_) {
    if (!e.value.allFinite()) return false;
  }
  return true;
}

ParamSet& ParamSet::operator+=(const ParamSet& other) {
  if (!same_layout(other)) throw Error(ErrorKind::ShapeMismatch, "parameter layouts differ");
  for (std::size_t k = 0; k < size(); ++k) entries_[k].value += other.entries_[k].value;
  return *this;
}

ParamSet& ParamSet::operator*=(double factor) {
  for (auto& e : entries_) e.value *= factor;
  return *this;
}

Matrix glorot_uniform(std::size_t rows, std::size_t cols, Rng& rng) {
  const double bound = std::sqrt(6.0 / static_cast<double>(rows + cols));
  Matrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) m(r, c) = rng.uniform(-bound, bound);
  }
  return m;
}

BoundParams::BoundParams(Tape& tape, const ParamSet& params) : params_(&params) {
  vars_.reserve(params.size());
  for (const auto& e : params) vars_.push_back(tape.parameter(e.value));
}

Var BoundParams::operator[](std::string_view name) const { return vars_[params_->index_of(name)]; }

void BoundParams::accumulate_gradients(const Tape& tape, ParamSet& into) const {
  if (!into.same_layout(*params_)) throw Error(ErrorKind::ShapeMismatch, "gradient layout mismatch");
  for (std::size_t k = 0; k < vars_.size(); ++k) into[k].value += tape.grad(vars_[k]);
}

namespace {
constexpr const char* kMagic = "nodefeat-params";
constexpr int kVersion = 1;
}  // namespace

void save_params(const ParamSet& params, std::ostream& out) {
  out << kMagic << ' ' << kVersion << '\n' << params.size() << '\n';
  char buf[64];
  for (const auto& e : params) {
    out << e.name << ' ' << e.value.rows() << ' ' << e.value.cols() << '\n';
    for (Eigen::Index r = 0; r < e.value.rows(); ++r) {
      for (Eigen::Index c = 0; c < e.value.cols(); ++c) {
        std::snprintf(buf, sizeof buf, "%a", e.value(r, c));
        if (c > 0) out << ' ';
        out << buf;
      }
      out << '\n';
    }
  }
  if (!out) throw Error(ErrorKind::IoFailure, "parameter write failed");
}

void save_params(const ParamSet& params, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::IoFailure, "cannot write " + path.string());
  save_params(params, out);
}

ParamSet load_params(std::istream& in) {
  std::string magic;
  int version = 0;
  std::size_t count = 0;
  if (!(in >> magic >> version >> count) || magic != kMagic) {
    throw Error(ErrorKind::InvalidValue, "not a parameter checkpoint");
  }
  if (version != kVersion) {
    throw Error(ErrorKind::InvalidValue, "unsupported checkpoint version " + std::to_string(version));
  }
  ParamSet params;
  for (std::size_t k = 0; k < count; ++k) {
    std::string name;
    Eigen::Index rows = 0;
    Eigen::Index cols = 0;
    if (!(in >> name >> rows >> cols) || rows < 0 || cols < 0) {
      throw Error(ErrorKind::InvalidValue, "bad parameter header");
    }
    Matrix m(rows, cols);
    std::string token;
    for (Eigen::Index r = 0; r < rows; ++r) {
      for (Eigen::Index c = 0; c < cols; ++c) {
        if (!(in >> token)) throw Error(ErrorKind::InvalidValue, "truncated values for " + name);
        char* end = nullptr;
        m(r, c) = std::strtod(token.c_str(), &end);
        if (end != token.c_str() + token.size()) {
          throw Error(ErrorKind::InvalidValue, "bad number '" + token + "' in " + name);
        }
      }
    }
    params.add(std::move(name), std::move(m));
  }
  return params;
}

ParamSet load_params(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::UnreadableFile, path.string());
  return load_params(in);
}

}  // namespace nodefeat::nn
