#include "poreuq/autodiff.hpp"

#include <cmath>
#include <cstring>

#include "poreuq/errors.hpp"

namespace poreuq::ad {

namespace {

void fill(double* p, int n, double v) {
  for (int i = 0; i < n; ++i) p[i] = v;
}

double falling_factorial(double p, int k) {
  double c = 1.0;
  for (int i = 0; i < k; ++i) c *= (p - i);
  return c;
}

}  // namespace

Tape::Tape(int capacity, int input_dim)
    : cap_(capacity), input_dim_(input_dim), spatial_dim_(input_dim - 1) {
  if (capacity < 1 || input_dim < 1)
    throw NumericError("tape: capacity and input_dim must be positive");
}

void Tape::alloc_storage(Node& n) const {
  n.val.assign(static_cast<std::size_t>(n.width) * cap_, 0.0);
  if (n.jets >= JetMode::First) {
    n.d1.assign(input_dim_, {});
    for (auto& a : n.d1) a.assign(n.val.size(), 0.0);
  }
  if (n.jets == JetMode::Second) {
    n.d2.assign(spatial_dim_, {});
    for (auto& a : n.d2) a.assign(n.val.size(), 0.0);
  }
}

int Tape::push(Node n) {
  alloc_storage(n);
  nodes_.push_back(std::move(n));
  return node_count() - 1;
}

int Tape::input(JetMode mode) {
  Node n;
  n.op = Op::kInput;
  n.width = input_dim_;
  n.jets = mode;
  return push(std::move(n));
}

int Tape::data_array() {
  Node n;
  n.op = Op::kData;
  return push(std::move(n));
}

int Tape::constant(double c) {
  Node n;
  n.op = Op::kConst;
  n.c0 = c;
  return push(std::move(n));
}

int Tape::param_scalar(int theta_index) {
  Node n;
  n.op = Op::kParamScalar;
  n.param_off = theta_index;
  return push(std::move(n));
}

int Tape::affine(int in, int theta_offset, int out_width, JetMode mode) {
  if (mode > nodes_[in].jets)
    throw NumericError("affine: operand does not carry the requested jets");
  Node n;
  n.op = Op::kAffine;
  n.a = in;
  n.param_off = theta_offset;
  n.width = out_width;
  n.in_width = nodes_[in].width;
  n.jets = mode;
  return push(std::move(n));
}

int Tape::tanh_op(int in, JetMode mode) {
  if (mode > nodes_[in].jets)
    throw NumericError("tanh: operand does not carry the requested jets");
  Node n;
  n.op = Op::kTanh;
  n.a = in;
  n.width = nodes_[in].width;
  n.jets = mode;
  return push(std::move(n));
}

int Tape::rect_tanh(int in, JetMode mode) {
  if (mode > nodes_[in].jets)
    throw NumericError("rect_tanh: operand does not carry the requested jets");
  Node n;
  n.op = Op::kRectTanh;
  n.a = in;
  n.width = nodes_[in].width;
  n.jets = mode;
  return push(std::move(n));
}

int Tape::slot_value(int node) {
  Node n;
  n.op = Op::kSlot;
  n.a = node;
  n.width = nodes_[node].width;
  n.slot_kind = 0;
  return push(std::move(n));
}

int Tape::slot_d1(int node, int axis) {
  if (nodes_[node].jets < JetMode::First)
    throw NumericError("slot_d1: node carries no first derivatives");
  Node n;
  n.op = Op::kSlot;
  n.a = node;
  n.width = nodes_[node].width;
  n.slot_kind = 1;
  n.slot_axis = axis;
  return push(std::move(n));
}

int Tape::slot_d2(int node, int spatial_axis) {
  if (nodes_[node].jets < JetMode::Second)
    throw NumericError("slot_d2: node carries no second derivatives");
  Node n;
  n.op = Op::kSlot;
  n.a = node;
  n.width = nodes_[node].width;
  n.slot_kind = 2;
  n.slot_axis = spatial_axis;
  return push(std::move(n));
}

static void check_widths(int wa, int wb) {
  if (wa != wb && wa != 1 && wb != 1)
    throw NumericError("binary op: incompatible widths");
}

int Tape::add(int a, int b) {
  check_widths(nodes_[a].width, nodes_[b].width);
  Node n;
  n.op = Op::kAdd;
  n.a = a;
  n.b = b;
  n.width = std::max(nodes_[a].width, nodes_[b].width);
  return push(std::move(n));
}

int Tape::sub(int a, int b) {
  check_widths(nodes_[a].width, nodes_[b].width);
  Node n;
  n.op = Op::kSub;
  n.a = a;
  n.b = b;
  n.width = std::max(nodes_[a].width, nodes_[b].width);
  return push(std::move(n));
}

int Tape::mul(int a, int b) {
  check_widths(nodes_[a].width, nodes_[b].width);
  Node n;
  n.op = Op::kMul;
  n.a = a;
  n.b = b;
  n.width = std::max(nodes_[a].width, nodes_[b].width);
  return push(std::move(n));
}

int Tape::scale(int a, double c) {
  Node n;
  n.op = Op::kScale;
  n.a = a;
  n.width = nodes_[a].width;
  n.c0 = c;
  return push(std::move(n));
}

int Tape::add_const(int a, double c) {
  Node n;
  n.op = Op::kAddConst;
  n.a = a;
  n.width = nodes_[a].width;
  n.c0 = c;
  return push(std::move(n));
}

int Tape::exp_op(int a) {
  Node n;
  n.op = Op::kExp;
  n.a = a;
  n.width = nodes_[a].width;
  return push(std::move(n));
}

int Tape::pow_clamped(int a, double exponent, double floor) {
  Node n;
  n.op = Op::kPowClamp;
  n.a = a;
  n.width = nodes_[a].width;
  n.c0 = exponent;
  n.c1 = floor;
  return push(std::move(n));
}

int Tape::record_tangent(int node, int wrt_axis) {
  auto key = std::make_pair(node, wrt_axis);
  auto it = tangent_memo_.find(key);
  if (it != tangent_memo_.end()) return it->second;

  // copy: push() below may reallocate the node vector
  const Node src = nodes_[node];
  int out = -1;
  switch (src.op) {
    case Op::kInput: {
      Node n;
      n.op = Op::kBasis;
      n.width = src.width;
      n.slot_axis = wrt_axis;
      out = push(std::move(n));
      break;
    }
    case Op::kConst:
    case Op::kData:
    case Op::kBasis:
    case Op::kParamScalar: {
      Node z;
      z.op = Op::kConst;
      z.c0 = 0.0;
      z.width = src.width;
      out = push(std::move(z));
      break;
    }
    case Op::kAffine:
    case Op::kLinMap: {
      int ta = record_tangent(src.a, wrt_axis);
      Node n;
      n.op = Op::kLinMap;
      n.a = ta;
      n.param_off = src.param_off;
      n.width = src.width;
      n.in_width = src.in_width;
      out = push(std::move(n));
      break;
    }
    case Op::kTanh: {
      int ta = record_tangent(src.a, wrt_axis);
      int t2 = mul(node, node);
      int s = add_const(scale(t2, -1.0), 1.0);  // 1 - tanh^2
      out = mul(s, ta);
      break;
    }
    case Op::kRectTanh: {
      int ta = record_tangent(src.a, wrt_axis);
      int q = add_const(scale(node, 2.0), -1.0);  // recover tanh
      int s = add_const(scale(mul(q, q), -1.0), 1.0);
      out = scale(mul(s, ta), 0.5);
      break;
    }
    case Op::kAdd:
      out = add(record_tangent(src.a, wrt_axis), record_tangent(src.b, wrt_axis));
      break;
    case Op::kSub:
      out = sub(record_tangent(src.a, wrt_axis), record_tangent(src.b, wrt_axis));
      break;
    case Op::kMul: {
      int ta = record_tangent(src.a, wrt_axis);
      int tb = record_tangent(src.b, wrt_axis);
      out = add(mul(nodes_[node].a, tb), mul(nodes_[node].b, ta));
      break;
    }
    case Op::kScale:
      out = scale(record_tangent(src.a, wrt_axis), src.c0);
      break;
    case Op::kAddConst:
      out = record_tangent(src.a, wrt_axis);
      break;
    case Op::kExp:
      out = mul(node, record_tangent(src.a, wrt_axis));
      break;
    case Op::kPowClamp:
    case Op::kPowClampDeriv: {
      int ta = record_tangent(src.a, wrt_axis);
      Node d;
      d.op = Op::kPowClampDeriv;
      d.a = src.a;
      d.width = src.width;
      d.c0 = src.c0;
      d.c1 = src.c1;
      d.deriv_order = src.deriv_order + 1;
      int dn = push(std::move(d));
      out = mul(dn, ta);
      break;
    }
    case Op::kSlot:
      throw NumericError("record_tangent: slot extracts cannot be re-differentiated");
  }
  tangent_memo_[key] = out;
  return out;
}

void Tape::set_active(int n) {
  if (n < 0 || n > cap_) throw NumericError("tape: active batch exceeds capacity");
  n_ = n;
}

void Tape::set_input_values(int node, const double* xs, int n) {
  set_active(n);
  Node& in = nodes_[node];
  if (in.op != Op::kInput) throw NumericError("set_input_values: not an input node");
  for (int j = 0; j < in.width; ++j) {
    double* v = in.val.data() + static_cast<std::size_t>(j) * cap_;
    for (int i = 0; i < n; ++i) v[i] = xs[static_cast<std::size_t>(i) * input_dim_ + j];
  }
}

void Tape::set_data_values(int node, const double* values, int n) {
  set_active(n);
  Node& nd = nodes_[node];
  if (nd.op != Op::kData) throw NumericError("set_data_values: not a data node");
  std::memcpy(nd.val.data(), values, static_cast<std::size_t>(n) * sizeof(double));
}

void Tape::forward(std::span<const double> theta) {
  for (auto& n : nodes_) forward_node(n, theta);
}

void Tape::forward_node(Node& n, std::span<const double> theta) {
  const int nb = n_;
  const int cap = cap_;
  switch (n.op) {
    case Op::kData:
      break;  // values provided externally
    case Op::kInput: {
      // values provided externally; jets are the coordinate seeds
      if (n.jets >= JetMode::First)
        for (int a = 0; a < input_dim_; ++a)
          for (int j = 0; j < n.width; ++j)
            fill(n.d1[a].data() + static_cast<std::size_t>(j) * cap, nb, a == j ? 1.0 : 0.0);
      if (n.jets == JetMode::Second)
        for (int s = 0; s < spatial_dim_; ++s)
          for (int j = 0; j < n.width; ++j)
            fill(n.d2[s].data() + static_cast<std::size_t>(j) * cap, nb, 0.0);
      break;
    }
    case Op::kConst:
      for (int j = 0; j < n.width; ++j)
        fill(n.val.data() + static_cast<std::size_t>(j) * cap, nb, n.c0);
      break;
    case Op::kBasis:
      for (int j = 0; j < n.width; ++j)
        fill(n.val.data() + static_cast<std::size_t>(j) * cap, nb,
             j == n.slot_axis ? 1.0 : 0.0);
      break;
    case Op::kParamScalar:
      fill(n.val.data(), nb, theta[n.param_off]);
      break;
    case Op::kAffine:
    case Op::kLinMap: {
      const Node& in = nodes_[n.a];
      const double* W = theta.data() + n.param_off;
      const double* B = (n.op == Op::kAffine)
                            ? theta.data() + n.param_off + static_cast<std::size_t>(n.width) * n.in_width
                            : nullptr;
      auto apply = [&](const std::vector<double>& src, std::vector<double>& dst,
                       bool with_bias) {
        for (int j = 0; j < n.width; ++j) {
          double* o = dst.data() + static_cast<std::size_t>(j) * cap;
          fill(o, nb, with_bias ? B[j] : 0.0);
          const double* wrow = W + static_cast<std::size_t>(j) * n.in_width;
          for (int i = 0; i < n.in_width; ++i) {
            const double w = wrow[i];
            const double* x = src.data() + static_cast<std::size_t>(i) * cap;
            for (int k = 0; k < nb; ++k) o[k] += w * x[k];
          }
        }
      };
      apply(in.val, n.val, B != nullptr);
      if (n.jets >= JetMode::First)
        for (int a = 0; a < input_dim_; ++a) apply(in.d1[a], n.d1[a], false);
      if (n.jets == JetMode::Second)
        for (int s = 0; s < spatial_dim_; ++s) apply(in.d2[s], n.d2[s], false);
      break;
    }
    case Op::kTanh:
    case Op::kRectTanh: {
      const Node& in = nodes_[n.a];
      const bool rect = n.op == Op::kRectTanh;
      const double sc = rect ? 0.5 : 1.0;
      const std::size_t total = static_cast<std::size_t>(n.width) * cap;
      for (int j = 0; j < n.width; ++j) {
        const double* v = in.val.data() + static_cast<std::size_t>(j) * cap;
        double* o = n.val.data() + static_cast<std::size_t>(j) * cap;
        for (int k = 0; k < nb; ++k) {
          const double t = std::tanh(v[k]);
          o[k] = rect ? 0.5 * (t + 1.0) : t;
        }
      }
      (void)total;
      if (n.jets >= JetMode::First) {
        for (int a = 0; a < input_dim_; ++a) {
          for (int j = 0; j < n.width; ++j) {
            const std::size_t off = static_cast<std::size_t>(j) * cap;
            const double* g = in.d1[a].data() + off;
            const double* o = n.val.data() + off;
            double* og = n.d1[a].data() + off;
            for (int k = 0; k < nb; ++k) {
              const double t = rect ? 2.0 * o[k] - 1.0 : o[k];
              og[k] = sc * (1.0 - t * t) * g[k];
            }
          }
        }
      }
      if (n.jets == JetMode::Second) {
        for (int s = 0; s < spatial_dim_; ++s) {
          for (int j = 0; j < n.width; ++j) {
            const std::size_t off = static_cast<std::size_t>(j) * cap;
            const double* g = in.d1[s].data() + off;
            const double* h = in.d2[s].data() + off;
            const double* o = n.val.data() + off;
            double* oh = n.d2[s].data() + off;
            for (int k = 0; k < nb; ++k) {
              const double t = rect ? 2.0 * o[k] - 1.0 : o[k];
              const double sfac = 1.0 - t * t;
              oh[k] = sc * (sfac * h[k] - 2.0 * t * sfac * g[k] * g[k]);
            }
          }
        }
      }
      break;
    }
    case Op::kSlot: {
      const Node& in = nodes_[n.a];
      const std::vector<double>* src = &in.val;
      if (n.slot_kind == 1) src = &in.d1[n.slot_axis];
      if (n.slot_kind == 2) src = &in.d2[n.slot_axis];
      for (int j = 0; j < n.width; ++j)
        std::memcpy(n.val.data() + static_cast<std::size_t>(j) * cap,
                    src->data() + static_cast<std::size_t>(j) * cap,
                    static_cast<std::size_t>(nb) * sizeof(double));
      break;
    }
    case Op::kAdd:
    case Op::kSub:
    case Op::kMul: {
      const Node& a = nodes_[n.a];
      const Node& b = nodes_[n.b];
      for (int j = 0; j < n.width; ++j) {
        const double* pa = a.val.data() + static_cast<std::size_t>(a.width == 1 ? 0 : j) * cap;
        const double* pb = b.val.data() + static_cast<std::size_t>(b.width == 1 ? 0 : j) * cap;
        double* o = n.val.data() + static_cast<std::size_t>(j) * cap;
        if (n.op == Op::kAdd)
          for (int k = 0; k < nb; ++k) o[k] = pa[k] + pb[k];
        else if (n.op == Op::kSub)
          for (int k = 0; k < nb; ++k) o[k] = pa[k] - pb[k];
        else
          for (int k = 0; k < nb; ++k) o[k] = pa[k] * pb[k];
      }
      break;
    }
    case Op::kScale: {
      const Node& a = nodes_[n.a];
      for (std::size_t k = 0; k < static_cast<std::size_t>(n.width) * cap; ++k)
        n.val[k] = n.c0 * a.val[k];
      break;
    }
    case Op::kAddConst: {
      const Node& a = nodes_[n.a];
      for (std::size_t k = 0; k < static_cast<std::size_t>(n.width) * cap; ++k)
        n.val[k] = a.val[k] + n.c0;
      break;
    }
    case Op::kExp: {
      const Node& a = nodes_[n.a];
      for (int j = 0; j < n.width; ++j) {
        const std::size_t off = static_cast<std::size_t>(j) * cap;
        for (int k = 0; k < nb; ++k) n.val[off + k] = std::exp(a.val[off + k]);
      }
      break;
    }
    case Op::kPowClamp: {
      const Node& a = nodes_[n.a];
      for (int j = 0; j < n.width; ++j) {
        const std::size_t off = static_cast<std::size_t>(j) * cap;
        for (int k = 0; k < nb; ++k) {
          const double x = std::max(a.val[off + k], n.c1);
          n.val[off + k] = std::pow(x, n.c0);
        }
      }
      break;
    }
    case Op::kPowClampDeriv: {
      const Node& a = nodes_[n.a];
      const double coef = falling_factorial(n.c0, n.deriv_order);
      for (int j = 0; j < n.width; ++j) {
        const std::size_t off = static_cast<std::size_t>(j) * cap;
        for (int k = 0; k < nb; ++k) {
          const double x = a.val[off + k];
          n.val[off + k] =
              x > n.c1 ? coef * std::pow(x, n.c0 - n.deriv_order) : 0.0;
        }
      }
      break;
    }
  }
}

void Tape::ensure_adjoint(Node& n) {
  if (n.adjoint_live) return;
  n.adjoint_live = true;
  n.aval.assign(static_cast<std::size_t>(n.width) * cap_, 0.0);
  if (n.jets >= JetMode::First) {
    n.ad1.assign(input_dim_, {});
    for (auto& a : n.ad1) a.assign(n.aval.size(), 0.0);
  }
  if (n.jets == JetMode::Second) {
    n.ad2.assign(spatial_dim_, {});
    for (auto& a : n.ad2) a.assign(n.aval.size(), 0.0);
  }
}

void Tape::zero_adjoints() {
  for (auto& n : nodes_) {
    if (!n.adjoint_live) continue;
    std::fill(n.aval.begin(), n.aval.end(), 0.0);
    for (auto& a : n.ad1) std::fill(a.begin(), a.end(), 0.0);
    for (auto& a : n.ad2) std::fill(a.begin(), a.end(), 0.0);
  }
}

void Tape::seed_value_adjoint(int node, const double* w, int n) {
  Node& nd = nodes_[node];
  ensure_adjoint(nd);
  if (nd.width != 1) throw NumericError("seed_value_adjoint: width-1 nodes only");
  for (int i = 0; i < n; ++i) nd.aval[i] += w[i];
}

void Tape::backward(std::span<const double> theta, std::span<double> grad_theta) {
  for (int id = node_count() - 1; id >= 0; --id) {
    if (!nodes_[id].adjoint_live) continue;
    backward_node(id, theta, grad_theta);
  }
}

void Tape::backward_node(int id, std::span<const double> theta, std::span<double> grad) {
  Node& n = nodes_[id];
  const int nb = n_;
  const int cap = cap_;
  switch (n.op) {
    case Op::kInput:
    case Op::kData:
    case Op::kConst:
    case Op::kBasis:
      break;
    case Op::kParamScalar: {
      double s = 0.0;
      for (int k = 0; k < nb; ++k) s += n.aval[k];
      grad[n.param_off] += s;
      break;
    }
    case Op::kAffine:
    case Op::kLinMap: {
      Node& in = nodes_[n.a];
      ensure_adjoint(in);
      const double* W = theta.data() + n.param_off;
      double* gW = grad.data() + n.param_off;
      double* gB = (n.op == Op::kAffine)
                       ? grad.data() + n.param_off + static_cast<std::size_t>(n.width) * n.in_width
                       : nullptr;
      auto pull = [&](const std::vector<double>& oadj, const std::vector<double>& ival,
                      std::vector<double>& iadj, bool with_bias) {
        for (int j = 0; j < n.width; ++j) {
          const double* oa = oadj.data() + static_cast<std::size_t>(j) * cap;
          const double* wrow = W + static_cast<std::size_t>(j) * n.in_width;
          double* gwrow = gW + static_cast<std::size_t>(j) * n.in_width;
          if (with_bias) {
            double s = 0.0;
            for (int k = 0; k < nb; ++k) s += oa[k];
            gB[j] += s;
          }
          for (int i = 0; i < n.in_width; ++i) {
            const double w = wrow[i];
            const double* xi = ival.data() + static_cast<std::size_t>(i) * cap;
            double* ia = iadj.data() + static_cast<std::size_t>(i) * cap;
            double dot = 0.0;
            for (int k = 0; k < nb; ++k) {
              ia[k] += w * oa[k];
              dot += oa[k] * xi[k];
            }
            gwrow[i] += dot;
          }
        }
      };
      pull(n.aval, in.val, in.aval, gB != nullptr);
      if (n.jets >= JetMode::First)
        for (int a = 0; a < input_dim_; ++a) pull(n.ad1[a], in.d1[a], in.ad1[a], false);
      if (n.jets == JetMode::Second)
        for (int s = 0; s < spatial_dim_; ++s) pull(n.ad2[s], in.d2[s], in.ad2[s], false);
      break;
    }
    case Op::kTanh:
    case Op::kRectTanh: {
      Node& in = nodes_[n.a];
      ensure_adjoint(in);
      const bool rect = n.op == Op::kRectTanh;
      const double sc = rect ? 0.5 : 1.0;
      for (int j = 0; j < n.width; ++j) {
        const std::size_t off = static_cast<std::size_t>(j) * cap;
        const double* o = n.val.data() + off;
        const double* av = n.aval.data() + off;
        double* iav = in.aval.data() + off;
        for (int k = 0; k < nb; ++k) {
          const double t = rect ? 2.0 * o[k] - 1.0 : o[k];
          iav[k] += av[k] * sc * (1.0 - t * t);
        }
        if (n.jets >= JetMode::First) {
          for (int a = 0; a < input_dim_; ++a) {
            const double* ag = n.ad1[a].data() + off;
            const double* g = in.d1[a].data() + off;
            double* iag = in.ad1[a].data() + off;
            for (int k = 0; k < nb; ++k) {
              const double t = rect ? 2.0 * o[k] - 1.0 : o[k];
              const double s = 1.0 - t * t;
              iag[k] += ag[k] * sc * s;
              iav[k] += ag[k] * sc * (-2.0 * t * s) * g[k];
            }
          }
        }
        if (n.jets == JetMode::Second) {
          for (int sx = 0; sx < spatial_dim_; ++sx) {
            const double* ah = n.ad2[sx].data() + off;
            const double* g = in.d1[sx].data() + off;
            const double* h = in.d2[sx].data() + off;
            double* iag = in.ad1[sx].data() + off;
            double* iah = in.ad2[sx].data() + off;
            for (int k = 0; k < nb; ++k) {
              const double t = rect ? 2.0 * o[k] - 1.0 : o[k];
              const double s = 1.0 - t * t;
              iah[k] += ah[k] * sc * s;
              iag[k] += ah[k] * sc * (-4.0 * t * s * g[k]);
              iav[k] += ah[k] * sc *
                        (-2.0 * t * s * h[k] - 2.0 * s * (s - 2.0 * t * t) * g[k] * g[k]);
            }
          }
        }
      }
      break;
    }
    case Op::kSlot: {
      Node& in = nodes_[n.a];
      ensure_adjoint(in);
      std::vector<double>* dst = &in.aval;
      if (n.slot_kind == 1) dst = &in.ad1[n.slot_axis];
      if (n.slot_kind == 2) dst = &in.ad2[n.slot_axis];
      for (int j = 0; j < n.width; ++j) {
        const std::size_t off = static_cast<std::size_t>(j) * cap;
        for (int k = 0; k < nb; ++k) (*dst)[off + k] += n.aval[off + k];
      }
      break;
    }
    case Op::kAdd:
    case Op::kSub: {
      Node& a = nodes_[n.a];
      Node& b = nodes_[n.b];
      ensure_adjoint(a);
      ensure_adjoint(b);
      const double sb = n.op == Op::kAdd ? 1.0 : -1.0;
      for (int j = 0; j < n.width; ++j) {
        const double* av = n.aval.data() + static_cast<std::size_t>(j) * cap;
        double* pa = a.aval.data() + static_cast<std::size_t>(a.width == 1 ? 0 : j) * cap;
        double* pb = b.aval.data() + static_cast<std::size_t>(b.width == 1 ? 0 : j) * cap;
        for (int k = 0; k < nb; ++k) {
          pa[k] += av[k];
          pb[k] += sb * av[k];
        }
      }
      break;
    }
    case Op::kMul: {
      Node& a = nodes_[n.a];
      Node& b = nodes_[n.b];
      ensure_adjoint(a);
      ensure_adjoint(b);
      for (int j = 0; j < n.width; ++j) {
        const std::size_t ja = static_cast<std::size_t>(a.width == 1 ? 0 : j) * cap;
        const std::size_t jb = static_cast<std::size_t>(b.width == 1 ? 0 : j) * cap;
        const double* av = n.aval.data() + static_cast<std::size_t>(j) * cap;
        for (int k = 0; k < nb; ++k) {
          a.aval[ja + k] += av[k] * b.val[jb + k];
          b.aval[jb + k] += av[k] * a.val[ja + k];
        }
      }
      break;
    }
    case Op::kScale: {
      Node& a = nodes_[n.a];
      ensure_adjoint(a);
      for (std::size_t k = 0; k < static_cast<std::size_t>(n.width) * cap; ++k)
        a.aval[k] += n.c0 * n.aval[k];
      break;
    }
    case Op::kAddConst: {
      Node& a = nodes_[n.a];
      ensure_adjoint(a);
      for (std::size_t k = 0; k < static_cast<std::size_t>(n.width) * cap; ++k)
        a.aval[k] += n.aval[k];
      break;
    }
    case Op::kExp: {
      Node& a = nodes_[n.a];
      ensure_adjoint(a);
      for (int j = 0; j < n.width; ++j) {
        const std::size_t off = static_cast<std::size_t>(j) * cap;
        for (int k = 0; k < nb; ++k) a.aval[off + k] += n.aval[off + k] * n.val[off + k];
      }
      break;
    }
    case Op::kPowClamp: {
      Node& a = nodes_[n.a];
      ensure_adjoint(a);
      for (int j = 0; j < n.width; ++j) {
        const std::size_t off = static_cast<std::size_t>(j) * cap;
        for (int k = 0; k < nb; ++k) {
          const double x = a.val[off + k];
          if (x > n.c1)
            a.aval[off + k] += n.aval[off + k] * n.c0 * std::pow(x, n.c0 - 1.0);
        }
      }
      break;
    }
    case Op::kPowClampDeriv: {
      Node& a = nodes_[n.a];
      ensure_adjoint(a);
      const double coef = falling_factorial(n.c0, n.deriv_order + 1);
      for (int j = 0; j < n.width; ++j) {
        const std::size_t off = static_cast<std::size_t>(j) * cap;
        for (int k = 0; k < nb; ++k) {
          const double x = a.val[off + k];
          if (x > n.c1)
            a.aval[off + k] +=
                n.aval[off + k] * coef * std::pow(x, n.c0 - n.deriv_order - 1.0);
        }
      }
      break;
    }
  }
}

int build_mlp(Tape& tape, const MlpShape& shape, int theta_offset, int input_node,
              JetMode mode) {
  if (tape.input_dim() != shape.input_dim)
    throw NumericError("build_mlp: tape input_dim does not match network spec");
  int off = theta_offset;
  int h = tape.affine(input_node, off, shape.width, mode);
  off += (shape.input_dim + 1) * shape.width;
  h = tape.tanh_op(h, mode);
  for (int l = 1; l < shape.hidden_layers; ++l) {
    h = tape.affine(h, off, shape.width, mode);
    off += (shape.width + 1) * shape.width;
    h = tape.tanh_op(h, mode);
  }
  int out = tape.affine(h, off, 1, mode);
  off += shape.width + 1;
  if (shape.out_act == OutputActivation::RectifiedTanh) out = tape.rect_tanh(out, mode);
  return out;
}

DualBatch eval_network(const MlpShape& shape, std::span<const double> theta,
                       std::span<const double> points, int n, JetMode mode) {
  if (static_cast<int>(theta.size()) != shape.param_count())
    throw NumericError("eval_network: parameter slice length mismatch");
  if (static_cast<int>(points.size()) != n * shape.input_dim)
    throw NumericError("eval_network: point batch does not match input dimension");
  Tape tape(n, shape.input_dim);
  const int in = tape.input(mode);
  const int out = build_mlp(tape, shape, 0, in, mode);
  tape.set_input_values(in, points.data(), n);
  tape.forward(theta);

  DualBatch d;
  d.n = n;
  d.input_dim = shape.input_dim;
  d.spatial_dim = shape.input_dim - 1;
  d.value.assign(tape.values(out), tape.values(out) + n);
  if (mode >= JetMode::First) {
    d.first.resize(d.input_dim);
    for (int a = 0; a < d.input_dim; ++a)
      d.first[a].assign(tape.d1(out, a), tape.d1(out, a) + n);
  }
  if (mode == JetMode::Second) {
    d.second.resize(d.spatial_dim);
    for (int s = 0; s < d.spatial_dim; ++s)
      d.second[s].assign(tape.d2(out, s), tape.d2(out, s) + n);
  }
  return d;
}

}  // namespace poreuq::ad
