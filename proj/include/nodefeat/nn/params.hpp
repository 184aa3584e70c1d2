#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "nodefeat/matrix.hpp"
#include "nodefeat/nn/tape.hpp"
#include "nodefeat/rng.hpp"

namespace nodefeat::nn {

struct NamedMatrix {
  std::string name;
  Matrix value;
  friend bool operator==(const NamedMatrix& a, const NamedMatrix& b) {
    return a.name == b.name && a.value.rows() == b.value.rows() &&
           a.value.cols() == b.value.cols() && a.value == b.value;
  }
};

/// Ordered set of uniquely named parameter matrices. Gradients use the same
/// type with identical names and shapes.
class ParamSet {
 public:
  void add(std::string name, Matrix value);

  bool contains(std::string_view name) const;
  const Matrix& at(std::string_view name) const;
  Matrix& at(std::string_view name);
  std::size_t index_of(std::string_view name) const;

  std::size_t size() const { return entries_.size(); }
  std::size_t total_entries() const;
  const NamedMatrix& operator[](std::size_t k) const { return entries_[k]; }
  NamedMatrix& operator[](std::size_t k) { return entries_[k]; }
  auto begin() const { return entries_.begin(); }
  auto end() const { return entries_.end(); }
  auto begin() { return entries_.begin(); }
  auto end() { return entries_.end(); }

  /// Same names and shapes, all zeros.
  ParamSet zeros_like() const;
  bool same_layout(const ParamSet& other) const;
  bool all_finite() const;

  ParamSet& operator+=(const ParamSet& other);
  ParamSet& operator*=(double factor);

  friend bool operator==(const ParamSet&, const ParamSet&) = default;

 private:
  std::vector<NamedMatrix> entries_;
};

/// Uniform on +-sqrt(6 / (rows + cols)), drawn row-major from `rng`.
Matrix glorot_uniform(std::size_t rows, std::size_t cols, Rng& rng);

/// Tape leaves for every parameter, in ParamSet order.
class BoundParams {
 public:
  BoundParams(Tape& tape, const ParamSet& params);
  Var operator[](std::string_view name) const;
  bool contains(std::string_view name) const { return params_->contains(name); }
  /// Adds `tape.grad` of every parameter into `into` (same layout).
  void accumulate_gradients(const Tape& tape, ParamSet& into) const;

 private:
  const ParamSet* params_;
  std::vector<Var> vars_;
};

/// Text checkpoint, format version 1:
///
///   nodefeat-params 1
///   <count>
///   <name> <rows> <cols>
///   <row-major values as C99 hex floats, one row per line>
///   ...
///
/// Hex floats make reload bit-exact.
void save_params(const ParamSet& params, std::ostream& out);
void save_params(const ParamSet& params, const std::filesystem::path& path);
ParamSet load_params(std::istream& in);
ParamSet load_params(const std::filesystem::path& path);

}  // namespace nodefeat::nn
