#include "hyfi/grad.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include "hyfi/hygeo.hpp"

namespace hyfi::grad {

namespace {

// Lower bound on the denominator of the acosh derivative.
constexpr double kAcoshSlopeFloor = 1e-8;

struct Registered {
  std::string_view name;
  Primitive op;
  int arity;  // -1 = any length; -2 = two equal-length halves
};

constexpr std::array<Registered, 25> kRegistry{{
    {"add", Primitive::kAdd, 2},
    {"sub", Primitive::kSub, 2},
    {"mul", Primitive::kMul, 2},
    {"div", Primitive::kDiv, 2},
    {"neg", Primitive::kNeg, 1},
    {"square", Primitive::kSquare, 1},
    {"sqrt", Primitive::kSqrt, 1},
    {"exp", Primitive::kExp, 1},
    {"log", Primitive::kLog, 1},
    {"log1p", Primitive::kLog1p, 1},
    {"sinh", Primitive::kSinh, 1},
    {"cosh", Primitive::kCosh, 1},
    {"sigmoid", Primitive::kSigmoid, 1},
    {"acosh", Primitive::kAcosh, 1},
    {"acosh1p", Primitive::kAcosh1p, 1},
    {"sinhc", Primitive::kSinhc, 1},
    {"sinhc_sqrt", Primitive::kSinhcSqrt, 1},
    {"dot", Primitive::kDot, -2},
    {"sum", Primitive::kSum, -1},
    {"sumsq", Primitive::kSumSq, -1},
    {"sqdist", Primitive::kSqDist, -2},
    {"normdiff", Primitive::kNormDiff, -2},
    {"logsumexp", Primitive::kLogSumExp, -1},
    {"scale", Primitive::kScale, 0},
    {"offset", Primitive::kOffset, 0},
}};

double acosh_slope(double x) {
  return 1.0 / std::max(std::sqrt(x * (x + 2.0)), kAcoshSlopeFloor);
}

double sigmoid_value(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

}  // namespace

std::string_view primitive_name(Primitive p) {
  if (p == Primitive::kLeaf) return "leaf";
  if (p == Primitive::kDotConst) return "dot_const";
  for (const auto& r : kRegistry) {
    if (r.op == p) return r.name;
  }
  return "unknown";
}

std::vector<std::string_view> registered_primitives() {
  std::vector<std::string_view> out;
  for (const auto& r : kRegistry) {
    if (r.arity != 0) out.push_back(r.name);
  }
  return out;
}

NonFiniteError::NonFiniteError(std::size_t node, Primitive op, const std::string& what)
    : std::runtime_error("non-finite " + what + " at node " + std::to_string(node) + " (" +
                         std::string(primitive_name(op)) + ")"),
      node_(node),
      op_(op) {}

double Var::value() const { return tape_->value(*this); }

void Tape::check(Var v) const {
  if (v.tape() != this || v.index() >= nodes_.size()) {
    throw std::invalid_argument("variable does not belong to this tape");
  }
}

Var Tape::push(Primitive op, double value) {
  if (!std::isfinite(value)) throw NonFiniteError(nodes_.size(), op, "value");
  nodes_.push_back(Node{op, static_cast<std::uint32_t>(edges_.size()), 0, value});
  return Var(this, static_cast<std::uint32_t>(nodes_.size() - 1));
}

void Tape::edge(Var input, double partial) {
  if (!std::isfinite(partial)) {
    const auto node = nodes_.size() - 1;
    const auto op = nodes_.back().op;
    edges_.resize(nodes_.back().first_edge);
    nodes_.pop_back();
    throw NonFiniteError(node, op, "partial derivative");
  }
  edges_.push_back(Edge{input.index(), partial});
  ++nodes_.back().n_edges;
}

Var Tape::leaf(double value) { return push(Primitive::kLeaf, value); }

Var Tape::add(Var a, Var b) {
  check(a);
  check(b);
  auto out = push(Primitive::kAdd, a.value() + b.value());
  edge(a, 1.0);
  edge(b, 1.0);
  return out;
}

Var Tape::sub(Var a, Var b) {
  check(a);
  check(b);
  auto out = push(Primitive::kSub, a.value() - b.value());
  edge(a, 1.0);
  edge(b, -1.0);
  return out;
}

Var Tape::mul(Var a, Var b) {
  check(a);
  check(b);
  const double av = a.value();
  const double bv = b.value();
  auto out = push(Primitive::kMul, av * bv);
  edge(a, bv);
  edge(b, av);
  return out;
}

Var Tape::div(Var a, Var b) {
  check(a);
  check(b);
  const double av = a.value();
  const double bv = b.value();
  auto out = push(Primitive::kDiv, av / bv);
  edge(a, 1.0 / bv);
  edge(b, -av / (bv * bv));
  return out;
}

Var Tape::neg(Var a) {
  check(a);
  auto out = push(Primitive::kNeg, -a.value());
  edge(a, -1.0);
  return out;
}

Var Tape::scale(Var a, double c) {
  check(a);
  auto out = push(Primitive::kScale, c * a.value());
  edge(a, c);
  return out;
}

Var Tape::offset(Var a, double c) {
  check(a);
  auto out = push(Primitive::kOffset, a.value() + c);
  edge(a, 1.0);
  return out;
}

Var Tape::unary(Primitive p, Var a) {
  check(a);
  const double x = a.value();
  double v = 0.0;
  double d = 0.0;
  switch (p) {
    case Primitive::kNeg:
      return neg(a);
    case Primitive::kSquare:
      v = x * x;
      d = 2.0 * x;
      break;
    case Primitive::kSqrt:
      v = std::sqrt(x);
      d = 0.5 / v;
      break;
    case Primitive::kExp:
      v = std::exp(x);
      d = v;
      break;
    case Primitive::kLog:
      v = std::log(x);
      d = 1.0 / x;
      break;
    case Primitive::kLog1p:
      v = std::log1p(x);
      d = 1.0 / (1.0 + x);
      break;
    case Primitive::kSinh:
      v = std::sinh(x);
      d = std::cosh(x);
      break;
    case Primitive::kCosh:
      v = std::cosh(x);
      d = std::sinh(x);
      break;
    case Primitive::kSigmoid:
      v = sigmoid_value(x);
      d = v * (1.0 - v);
      break;
    case Primitive::kAcosh: {
      const double y = std::max(x - 1.0, 0.0);
      v = hygeo::acosh1p(y);
      d = acosh_slope(y);
      break;
    }
    case Primitive::kAcosh1p: {
      const double y = std::max(x, 0.0);
      v = hygeo::acosh1p(y);
      d = acosh_slope(y);
      break;
    }
    case Primitive::kSinhc:
      v = hygeo::sinhc(x);
      d = std::abs(x) < 1e-3 ? x / 3.0 + x * x * x / 30.0 : (std::cosh(x) - v) / x;
      break;
    case Primitive::kSinhcSqrt: {
      const double u = std::max(x, 0.0);
      const double r = std::sqrt(u);
      v = hygeo::sinhc(r);
      d = u < 1e-3 ? 1.0 / 6.0 + u / 60.0 + u * u / 1680.0 : (std::cosh(r) - v) / (2.0 * u);
      break;
    }
    default:
      throw UnregisteredPrimitiveError("primitive '" + std::string(primitive_name(p)) +
                                       "' is not an elementwise function");
  }
  auto out = push(p, v);
  edge(a, d);
  return out;
}

Var Tape::dot(std::span<const Var> a, std::span<const Var> b) {
  if (a.size() != b.size()) throw std::invalid_argument("dot: length mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    check(a[i]);
    check(b[i]);
    s += a[i].value() * b[i].value();
  }
  auto out = push(Primitive::kDot, s);
  for (std::size_t i = 0; i < a.size(); ++i) {
    edge(a[i], b[i].value());
    edge(b[i], a[i].value());
  }
  return out;
}

Var Tape::dot(std::span<const Var> a, std::span<const double> b) {
  if (a.size() != b.size()) throw std::invalid_argument("dot: length mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    check(a[i]);
    s += a[i].value() * b[i];
  }
  auto out = push(Primitive::kDotConst, s);
  for (std::size_t i = 0; i < a.size(); ++i) edge(a[i], b[i]);
  return out;
}

Var Tape::sum(std::span<const Var> a) {
  double s = 0.0;
  for (auto v : a) {
    check(v);
    s += v.value();
  }
  auto out = push(Primitive::kSum, s);
  for (auto v : a) edge(v, 1.0);
  return out;
}

Var Tape::sumsq(std::span<const Var> a) {
  double s = 0.0;
  for (auto v : a) {
    check(v);
    s += v.value() * v.value();
  }
  auto out = push(Primitive::kSumSq, s);
  for (auto v : a) edge(v, 2.0 * v.value());
  return out;
}

Var Tape::sqdist(std::span<const Var> a, std::span<const Var> b) {
  if (a.size() != b.size()) throw std::invalid_argument("sqdist: length mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    check(a[i]);
    check(b[i]);
    const double d = a[i].value() - b[i].value();
    s += d * d;
  }
  auto out = push(Primitive::kSqDist, s);
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i].value() - b[i].value();
    edge(a[i], 2.0 * d);
    edge(b[i], -2.0 * d);
  }
  return out;
}

Var Tape::normdiff(std::span<const Var> a, std::span<const Var> b) {
  if (a.size() != b.size()) throw std::invalid_argument("normdiff: length mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    check(a[i]);
    check(b[i]);
    s += (a[i].value() - b[i].value()) * (a[i].value() + b[i].value());
  }
  auto out = push(Primitive::kNormDiff, s);
  for (std::size_t i = 0; i < a.size(); ++i) {
    edge(a[i], 2.0 * a[i].value());
    edge(b[i], -2.0 * b[i].value());
  }
  return out;
}

Var Tape::logsumexp(std::span<const Var> a) {
  if (a.empty()) throw std::invalid_argument("logsumexp of an empty list");
  double m = -std::numeric_limits<double>::infinity();
  for (auto v : a) {
    check(v);
    m = std::max(m, v.value());
  }
  double s = 0.0;
  for (auto v : a) s += std::exp(v.value() - m);
  auto out = push(Primitive::kLogSumExp, m + std::log(s));
  for (auto v : a) edge(v, std::exp(v.value() - m) / s);
  return out;
}

Var Tape::apply(std::string_view name, std::span<const Var> args) {
  const auto it = std::find_if(kRegistry.begin(), kRegistry.end(),
                               [&](const Registered& r) { return r.name == name; });
  if (it == kRegistry.end() || it->arity == 0) {
    throw UnregisteredPrimitiveError("primitive '" + std::string(name) +
                                     "' is not registered with the tape");
  }
  if (it->arity > 0 && args.size() != static_cast<std::size_t>(it->arity)) {
    throw std::invalid_argument("primitive '" + std::string(name) + "' takes " +
                                std::to_string(it->arity) + " argument(s)");
  }
  if (it->arity == -2 && args.size() % 2 != 0) {
    throw std::invalid_argument("primitive '" + std::string(name) +
                                "' takes two equal-length halves");
  }
  const auto half = args.size() / 2;
  switch (it->op) {
    case Primitive::kAdd:
      return add(args[0], args[1]);
    case Primitive::kSub:
      return sub(args[0], args[1]);
    case Primitive::kMul:
      return mul(args[0], args[1]);
    case Primitive::kDiv:
      return div(args[0], args[1]);
    case Primitive::kDot:
      return dot(args.first(half), args.subspan(half));
    case Primitive::kSqDist:
      return sqdist(args.first(half), args.subspan(half));
    case Primitive::kNormDiff:
      return normdiff(args.first(half), args.subspan(half));
    case Primitive::kSum:
      return sum(args);
    case Primitive::kSumSq:
      return sumsq(args);
    case Primitive::kLogSumExp:
      return logsumexp(args);
    default:
      return unary(it->op, args[0]);
  }
}

std::vector<double> Tape::adjoints(Var output) const {
  std::vector<double> adj;
  adjoints(output, adj);
  return adj;
}

void Tape::adjoints(Var output, std::vector<double>& adj) const {
  check(output);
  adj.assign(nodes_.size(), 0.0);
  adj[output.index()] = 1.0;
  for (std::size_t i = output.index() + 1; i-- > 0;) {
    const double a = adj[i];
    if (a == 0.0) continue;
    const auto& n = nodes_[i];
    const Edge* e = edges_.data() + n.first_edge;
    for (std::uint32_t k = 0; k < n.n_edges; ++k) adj[e[k].input] += a * e[k].partial;
  }
}

void Tape::clear() {
  nodes_.clear();
  edges_.clear();
}

// ---------------------------------------------------------------------------

Var operator+(Var a, Var b) { return a.tape()->add(a, b); }
Var operator-(Var a, Var b) { return a.tape()->sub(a, b); }
Var operator*(Var a, Var b) { return a.tape()->mul(a, b); }
Var operator/(Var a, Var b) { return a.tape()->div(a, b); }
Var operator-(Var a) { return a.tape()->neg(a); }
Var operator+(Var a, double c) { return a.tape()->offset(a, c); }
Var operator+(double c, Var a) { return a.tape()->offset(a, c); }
Var operator-(Var a, double c) { return a.tape()->offset(a, -c); }
Var operator-(double c, Var a) { return a.tape()->offset(a.tape()->neg(a), c); }
Var operator*(Var a, double c) { return a.tape()->scale(a, c); }
Var operator*(double c, Var a) { return a.tape()->scale(a, c); }
Var operator/(Var a, double c) { return a.tape()->scale(a, 1.0 / c); }
Var operator/(double c, Var a) { return a.tape()->div(a.tape()->leaf(c), a); }

Var square(Var a) { return a.tape()->unary(Primitive::kSquare, a); }
Var sqrt(Var a) { return a.tape()->unary(Primitive::kSqrt, a); }
Var exp(Var a) { return a.tape()->unary(Primitive::kExp, a); }
Var log(Var a) { return a.tape()->unary(Primitive::kLog, a); }
Var log1p(Var a) { return a.tape()->unary(Primitive::kLog1p, a); }
Var sinh(Var a) { return a.tape()->unary(Primitive::kSinh, a); }
Var cosh(Var a) { return a.tape()->unary(Primitive::kCosh, a); }
Var sigmoid(Var a) { return a.tape()->unary(Primitive::kSigmoid, a); }
Var acosh(Var a) { return a.tape()->unary(Primitive::kAcosh, a); }
Var acosh1p(Var a) { return a.tape()->unary(Primitive::kAcosh1p, a); }
Var sinhc(Var a) { return a.tape()->unary(Primitive::kSinhc, a); }
Var sinhc_sqrt(Var a) { return a.tape()->unary(Primitive::kSinhcSqrt, a); }

// ---------------------------------------------------------------------------

ParamLayout& ParamLayout::add(std::string name, std::size_t rows, std::size_t cols) {
  if (contains(name)) throw std::invalid_argument("duplicate parameter slice '" + name + "'");
  slices_.push_back(ParamSlice{std::move(name), size_, rows, cols});
  size_ += rows * cols;
  return *this;
}

const ParamSlice& ParamLayout::slice(std::string_view name) const {
  for (const auto& s : slices_) {
    if (s.name == name) return s;
  }
  throw std::out_of_range("no parameter slice named '" + std::string(name) + "'");
}

bool ParamLayout::contains(std::string_view name) const {
  return std::any_of(slices_.begin(), slices_.end(),
                     [&](const ParamSlice& s) { return s.name == name; });
}

ParamVector::ParamVector(ParamLayout layout)
    : layout_(std::move(layout)), flat_(layout_.size(), 0.0) {}

ParamVector::ParamVector(ParamLayout layout, std::vector<double> flat)
    : layout_(std::move(layout)), flat_(std::move(flat)) {
  if (flat_.size() != layout_.size()) {
    throw std::invalid_argument("parameter vector has " + std::to_string(flat_.size()) +
                                " entries but its layout covers " +
                                std::to_string(layout_.size()));
  }
}

std::span<double> ParamVector::operator[](std::string_view name) {
  const auto& s = layout_.slice(name);
  return std::span<double>(flat_).subspan(s.offset, s.size());
}

std::span<const double> ParamVector::operator[](std::string_view name) const {
  const auto& s = layout_.slice(name);
  return std::span<const double>(flat_).subspan(s.offset, s.size());
}

double& ParamVector::scalar(std::string_view name) { return (*this)[name][0]; }
double ParamVector::scalar(std::string_view name) const { return (*this)[name][0]; }

ParamVars::ParamVars(Tape& tape, const ParamVector& params) : layout_(&params.layout()) {
  vars_.reserve(params.size());
  for (double x : params.flat()) vars_.push_back(tape.leaf(x));
}

std::span<const Var> ParamVars::operator[](std::string_view name) const {
  const auto& s = layout_->slice(name);
  return std::span<const Var>(vars_).subspan(s.offset, s.size());
}

Var ParamVars::scalar(std::string_view name) const { return (*this)[name][0]; }

ValueAndGrad value_and_grad(const Objective& objective, const ParamVector& params) {
  Tape tape;
  return value_and_grad(objective, params, tape);
}

ValueAndGrad value_and_grad(const Objective& objective, const ParamVector& params, Tape& tape) {
  thread_local std::vector<double> adj;
  tape.clear();
  ParamVars vars(tape, params);
  const Var out = objective(tape, vars);
  tape.adjoints(out, adj);
  ParamVector grad(params.layout());
  auto g = grad.flat();
  const auto all = vars.all();
  for (std::size_t i = 0; i < all.size(); ++i) g[i] = adj[all[i].index()];
  return {out.value(), std::move(grad)};
}

ParamVector finite_diff_grad(const ScalarObjective& objective, const ParamVector& params,
                             double step) {
  if (!(step > 0.0)) throw std::invalid_argument("finite difference step must be positive");
  ParamVector probe = params;
  ParamVector grad(params.layout());
  auto x = probe.flat();
  auto g = grad.flat();
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double x0 = x[i];
    x[i] = x0 + step;
    const double fp = objective(probe);
    x[i] = x0 - step;
    const double fm = objective(probe);
    x[i] = x0;
    g[i] = (fp - fm) / (2.0 * step);
  }
  return grad;
}

ParamVector finite_diff_grad(const Objective& objective, const ParamVector& params,
                             double step) {
  return finite_diff_grad(
      [&](const ParamVector& p) {
        Tape tape;
        ParamVars vars(tape, p);
        return objective(tape, vars).value();
      },
      params, step);
}

double max_relative_error(std::span<const double> a, std::span<const double> b, double floor) {
  if (a.size() != b.size()) throw std::invalid_argument("max_relative_error: length mismatch");
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double scale = std::max({std::abs(a[i]), std::abs(b[i]), floor});
    worst = std::max(worst, std::abs(a[i] - b[i]) / scale);
  }
  return worst;
}

}  // namespace hyfi::grad
