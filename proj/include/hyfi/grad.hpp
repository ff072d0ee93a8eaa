#pragma once

// Define-by-run reverse-mode differentiation.
//
// A Tape records scalar nodes in evaluation order. Every node stores its value
// and the local partial derivative with respect to each input, so the adjoint
// sweep is a single reverse pass over the node list.

#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace hyfi::grad {

enum class Primitive : std::uint8_t {
  kLeaf,
  kAdd,
  kSub,
  kMul,
  kDiv,
  kNeg,
  kScale,
  kOffset,
  kSquare,
  kSqrt,
  kExp,
  kLog,
  kLog1p,
  kSinh,
  kCosh,
  kSigmoid,
  kAcosh,
  kAcosh1p,
  kSinhc,
  kSinhcSqrt,
  kDot,
  kDotConst,
  kSum,
  kSumSq,
  kSqDist,
  kNormDiff,
  kLogSumExp,
};

std::string_view primitive_name(Primitive p);

class UnregisteredPrimitiveError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class NonFiniteError : public std::runtime_error {
 public:
  NonFiniteError(std::size_t node, Primitive op, const std::string& what);
  std::size_t node() const { return node_; }
  Primitive op() const { return op_; }

 private:
  std::size_t node_;
  Primitive op_;
};

class Tape;

/// Handle to a node of a Tape. Cheap to copy; only valid while the tape lives.
class Var {
 public:
  Var() = default;

  double value() const;
  std::uint32_t index() const { return index_; }
  Tape* tape() const { return tape_; }

 private:
  friend class Tape;
  Var(Tape* tape, std::uint32_t index) : tape_(tape), index_(index) {}

  Tape* tape_ = nullptr;
  std::uint32_t index_ = 0;
};

class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var leaf(double value);

  std::size_t size() const { return nodes_.size(); }
  double value(Var v) const { return nodes_[v.index()].value; }
  Primitive op(std::size_t node) const { return nodes_[node].op; }

  Var add(Var a, Var b);
  Var sub(Var a, Var b);
  Var mul(Var a, Var b);
  Var div(Var a, Var b);
  Var neg(Var a);
  Var scale(Var a, double c);
  Var offset(Var a, double c);
  /// Elementwise scalar functions (kSquare ... kSinhcSqrt).
  Var unary(Primitive p, Var a);

  Var dot(std::span<const Var> a, std::span<const Var> b);
  Var dot(std::span<const Var> a, std::span<const double> b);
  Var sum(std::span<const Var> a);
  Var sumsq(std::span<const Var> a);
  /// |a - b|^2
  Var sqdist(std::span<const Var> a, std::span<const Var> b);
  /// |a|^2 - |b|^2, evaluated as (a - b).(a + b).
  Var normdiff(std::span<const Var> a, std::span<const Var> b);
  Var logsumexp(std::span<const Var> a);

  /// Looks a primitive up by name; unknown names throw UnregisteredPrimitiveError.
  Var apply(std::string_view name, std::span<const Var> args);

  /// Adjoint of every node with respect to `output`.
  std::vector<double> adjoints(Var output) const;
  /// Same, reusing `adj` as storage.
  void adjoints(Var output, std::vector<double>& adj) const;

  void clear();

 private:
  struct Node {
    Primitive op;
    std::uint32_t first_edge;
    std::uint32_t n_edges;
    double value;
  };
  struct Edge {
    std::uint32_t input;
    double partial;
  };

  void check(Var v) const;
  Var push(Primitive op, double value);
  void edge(Var input, double partial);
  void finish_node();

  std::vector<Node> nodes_;
  std::vector<Edge> edges_;
};

/// Names accepted by Tape::apply.
std::vector<std::string_view> registered_primitives();

Var operator+(Var a, Var b);
Var operator-(Var a, Var b);
Var operator*(Var a, Var b);
Var operator/(Var a, Var b);
Var operator-(Var a);
Var operator+(Var a, double c);
Var operator+(double c, Var a);
Var operator-(Var a, double c);
Var operator-(double c, Var a);
Var operator*(Var a, double c);
Var operator*(double c, Var a);
Var operator/(Var a, double c);
Var operator/(double c, Var a);

Var square(Var a);
Var sqrt(Var a);
Var exp(Var a);
Var log(Var a);
Var log1p(Var a);
Var sinh(Var a);
Var cosh(Var a);
Var sigmoid(Var a);
/// acosh with argument clamped to >= 1.
Var acosh(Var a);
/// acosh(1 + x), x clamped to >= 0.
Var acosh1p(Var a);
/// sinh(x)/x
Var sinhc(Var a);
/// sinh(sqrt(u))/sqrt(u) for u >= 0; smooth at u = 0.
Var sinhc_sqrt(Var a);

// ---------------------------------------------------------------------------
// Parameters

struct ParamSlice {
  std::string name;
  std::size_t offset = 0;
  std::size_t rows = 0;
  std::size_t cols = 0;

  std::size_t size() const { return rows * cols; }
  bool operator==(const ParamSlice&) const = default;
};

/// Named, disjoint slices covering [0, size()) in insertion order.
class ParamLayout {
 public:
  ParamLayout& add(std::string name, std::size_t rows, std::size_t cols = 1);

  const ParamSlice& slice(std::string_view name) const;
  bool contains(std::string_view name) const;
  std::size_t size() const { return size_; }
  const std::vector<ParamSlice>& slices() const { return slices_; }

  bool operator==(const ParamLayout&) const = default;

 private:
  std::vector<ParamSlice> slices_;
  std::size_t size_ = 0;
};

class ParamVector {
 public:
  ParamVector() = default;
  explicit ParamVector(ParamLayout layout);
  ParamVector(ParamLayout layout, std::vector<double> flat);

  const ParamLayout& layout() const { return layout_; }
  std::span<double> flat() { return flat_; }
  std::span<const double> flat() const { return flat_; }
  std::size_t size() const { return flat_.size(); }

  std::span<double> operator[](std::string_view name);
  std::span<const double> operator[](std::string_view name) const;
  double& scalar(std::string_view name);
  double scalar(std::string_view name) const;

  bool operator==(const ParamVector&) const = default;

 private:
  ParamLayout layout_;
  std::vector<double> flat_;
};

/// Parameters recorded as tape leaves, addressable with the same layout.
class ParamVars {
 public:
  ParamVars(Tape& tape, const ParamVector& params);

  std::span<const Var> operator[](std::string_view name) const;
  Var scalar(std::string_view name) const;
  std::span<const Var> all() const { return vars_; }
  const ParamLayout& layout() const { return *layout_; }

 private:
  const ParamLayout* layout_;
  std::vector<Var> vars_;
};

using Objective = std::function<Var(Tape&, const ParamVars&)>;
using ScalarObjective = std::function<double(const ParamVector&)>;

struct ValueAndGrad {
  double value;
  ParamVector grad;
};

ValueAndGrad value_and_grad(const Objective& objective, const ParamVector& params);
/// Records on `scratch` (cleared first) so repeated calls keep its capacity.
ValueAndGrad value_and_grad(const Objective& objective, const ParamVector& params, Tape& scratch);

/// Central differences (f(x + h e_i) - f(x - h e_i)) / 2h, one coordinate at a time.
ParamVector finite_diff_grad(const ScalarObjective& objective, const ParamVector& params,
                             double step);
/// Same, evaluating only the forward values of the recorded objective.
ParamVector finite_diff_grad(const Objective& objective, const ParamVector& params,
                             double step);

/// max_i |a_i - b_i| / max(|a_i|, |b_i|, floor)
double max_relative_error(std::span<const double> a, std::span<const double> b,
                          double floor = 1e-5);

}  // namespace hyfi::grad
