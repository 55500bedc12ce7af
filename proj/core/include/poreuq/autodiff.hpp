#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <vector>

namespace poreuq::ad {

/// Which input-derivative slots a subgraph propagates alongside values.
/// First: d/dx_a for every input axis. Second: additionally d2/dx_s2 for
/// every spatial axis (all axes except the last, which is time).
enum class JetMode { None = 0, First = 1, Second = 2 };

/// Batched network output with requested input derivatives.
struct DualBatch {
  int n = 0;
  int input_dim = 0;
  int spatial_dim = 0;
  std::vector<double> value;                // [n]
  std::vector<std::vector<double>> first;   // input_dim arrays of [n]
  std::vector<std::vector<double>> second;  // spatial_dim arrays of [n]
};

enum class OutputActivation { Linear, RectifiedTanh };

/// Dense feed-forward network shape: `hidden_layers` tanh layers of `width`
/// neurons, scalar output with the chosen output activation.
struct MlpShape {
  int input_dim = 2;
  int hidden_layers = 4;
  int width = 32;
  OutputActivation out_act = OutputActivation::Linear;

  int param_count() const {
    int n = (input_dim + 1) * width;                 // input layer
    n += (hidden_layers - 1) * (width + 1) * width;  // hidden layers
    n += width + 1;                                  // output layer
    return n;
  }
};

enum class Op {
  kInput,      // width = input_dim, one component per coordinate axis
  kData,       // width 1, per-point values provided externally
  kConst,      // broadcast scalar
  kBasis,      // unit component vector (tangents of the input node)
  kParamScalar,
  kAffine,
  kLinMap,     // affine reusing a weight block, no bias (tangent programs)
  kTanh,
  kRectTanh,   // 0.5*(tanh(z)+1)
  kSlot,       // extract one jet slot of a node as a plain value node
  kAdd,
  kSub,
  kMul,
  kScale,
  kAddConst,
  kExp,
  kPowClamp,       // max(x, floor)^p
  kPowClampDeriv,  // k-th derivative of max(x, floor)^p, zero below floor
};

/// Reverse-mode tape over batched primitives. Nodes are appended in
/// topological order; forward replays values (and jets where enabled),
/// backward accumulates parameter adjoints through every live slot.
/// A tape instance is single-threaded; concurrent evaluation requires one
/// tape per worker.
class Tape {
 public:
  Tape(int capacity, int input_dim);

  int capacity() const { return cap_; }
  int input_dim() const { return input_dim_; }
  int spatial_dim() const { return spatial_dim_; }
  int node_count() const { return static_cast<int>(nodes_.size()); }
  int width(int node) const { return nodes_[node].width; }

  // graph construction
  int input(JetMode mode);
  int data_array();
  int constant(double c);
  int param_scalar(int theta_index);
  int affine(int in, int theta_offset, int out_width, JetMode mode);
  int tanh_op(int in, JetMode mode);
  int rect_tanh(int in, JetMode mode);
  int slot_value(int node);
  int slot_d1(int node, int axis);
  int slot_d2(int node, int spatial_axis);
  int add(int a, int b);
  int sub(int a, int b);
  int mul(int a, int b);
  int scale(int a, double c);
  int add_const(int a, double c);
  int exp_op(int a);
  int pow_clamped(int a, double exponent, double floor);

  /// Appends nodes computing the exact derivative of `node` with respect to
  /// input axis `wrt_axis`, reusing previously recorded tangents. Tangent
  /// programs are made of ordinary tape ops, so they can be differentiated
  /// again (nested differentiation).
  int record_tangent(int node, int wrt_axis);

  // execution
  void set_active(int n);
  int active() const { return n_; }
  /// xs is row-major [n][input_dim].
  void set_input_values(int node, const double* xs, int n);
  void set_data_values(int node, const double* values, int n);
  void forward(std::span<const double> theta);

  const double* values(int node) const { return nodes_[node].val.data(); }
  const double* d1(int node, int axis) const { return nodes_[node].d1[axis].data(); }
  const double* d2(int node, int axis) const { return nodes_[node].d2[axis].data(); }

  /// Reverse pass from value-slot seeds accumulated via seed_value_adjoint.
  /// Parameter adjoints are accumulated into grad_theta (not zeroed here).
  void zero_adjoints();
  void seed_value_adjoint(int node, const double* w, int n);
  void backward(std::span<const double> theta, std::span<double> grad_theta);

 private:
  struct Node {
    Op op;
    int width = 1;
    JetMode jets = JetMode::None;
    int a = -1, b = -1;
    int param_off = -1;
    int in_width = 0;
    int slot_axis = -1;
    int slot_kind = 0;  // 0 value, 1 first, 2 second
    int deriv_order = 0;
    double c0 = 0.0, c1 = 0.0;
    std::vector<double> val;
    std::vector<std::vector<double>> d1, d2;
    std::vector<double> aval;
    std::vector<std::vector<double>> ad1, ad2;
    bool adjoint_live = false;
  };

  int push(Node n);
  void alloc_storage(Node& n) const;
  void ensure_adjoint(Node& n);

  void forward_node(Node& n, std::span<const double> theta);
  void backward_node(int id, std::span<const double> theta, std::span<double> grad);

  int cap_;
  int n_ = 0;
  int input_dim_;
  int spatial_dim_;
  std::vector<Node> nodes_;
  std::map<std::pair<int, int>, int> tangent_memo_;
};

/// Evaluates a feed-forward network at a batch of space-time points.
/// `points` is row-major [n][input_dim]; `theta` must hold exactly
/// shape.param_count() values. Throws NumericError on dimension mismatch.
DualBatch eval_network(const MlpShape& shape, std::span<const double> theta,
                       std::span<const double> points, int n, JetMode mode);

/// Builds the network subgraph on an existing tape, reading parameters at
/// theta_offset. Returns the output node id (width 1).
int build_mlp(Tape& tape, const MlpShape& shape, int theta_offset, int input_node,
              JetMode mode);

}  // namespace poreuq::ad
