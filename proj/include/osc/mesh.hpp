#pragma once

#include <functional>
#include <limits>
#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

namespace osc {

enum class MapKind { affine, analytic };

/// gamma_T : [0, length] -> closure of T.
class CoordinateMap {
public:
  using DerivativeFn = std::function<std::vector<double>(double t, int order)>;

  /// x = offset + orientation * t on [0, length].
  static CoordinateMap affine(double offset, int orientation, double length);

  /// `derivs(t, n)` returns gamma(t), gamma'(t), ..., gamma^{(n)}(t), n <= max_order.
  static CoordinateMap analytic(std::string name, double length, int max_order,
                                DerivativeFn derivs, double inverse_bound);

  MapKind kind() const { return kind_; }
  double length() const { return length_; }
  double offset() const { return offset_; }
  int orientation() const { return orientation_; }
  const std::string &name() const { return name_; }
  int max_order() const { return max_order_; }
  double inverse_derivative_bound() const { return inverse_bound_; }

  double operator()(double t) const;
  /// Throws ErrorKind::capability beyond max_order().
  std::vector<double> derivatives(double t, int order) const;

private:
  MapKind kind_ = MapKind::affine;
  double length_ = 1.0;
  double offset_ = 0.0;
  int orientation_ = 1;
  std::string name_ = "affine";
  int max_order_ = std::numeric_limits<int>::max();
  double inverse_bound_ = 1.0;
  DerivativeFn derivs_;
};

/// Arc (left, right) of the circle with its coordinate map.
struct Element {
  double left = 0.0;
  double right = 0.0;
  CoordinateMap map;
  /// true when gamma(0) is the right end of the arc.
  bool reversed = false;

  double arc_length() const { return right - left; }
};

/// One mesh of the circle [-pi/2, 3pi/2); element i ends where element i+1
/// starts, the last element wraps to the first.
class Mesh {
public:
  Mesh(std::vector<Element> elements, double scale, bool uniform_affine);

  std::size_t size() const { return elements_.size(); }
  const Element &operator[](std::size_t i) const { return elements_[i]; }
  const std::vector<Element> &elements() const { return elements_; }
  double scale() const { return scale_; }
  bool is_uniform_affine() const { return uniform_affine_; }
  std::vector<double> breakpoints() const;

  nlohmann::json to_json() const;

private:
  std::vector<Element> elements_;
  double scale_;
  bool uniform_affine_;
};

using MeshHandle = std::shared_ptr<const Mesh>;

struct MeshScale {
  std::vector<double> h_grid;
  std::vector<MeshHandle> meshes;
  /// Reference element Omega = (0, reference_length).
  double reference_length = 1.0;
};

struct RegularityReport {
  int order = 0;
  /// derivative_sups[j-1] = sup |gamma^{(j)}|, j = 1..order.
  std::vector<double> derivative_sups;
  double inverse_sup = 0.0;
  double R = 0.0;
  bool monotone = true;
  bool pass = false;
};

constexpr double circle_origin = -1.5707963267948966; // -pi/2

MeshHandle build_uniform_mesh(int n);
MeshScale build_uniform_circle_scale(const std::vector<int> &n_list);
/// Four arcs of length pi/2 with arcsine-branch coordinates on [0,1].
MeshScale build_counterexample_mesh();

RegularityReport check_regularity(const Mesh &mesh, int order, double R);

nlohmann::json to_json(const RegularityReport &report);

} // namespace osc
