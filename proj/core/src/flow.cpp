#include "pixmotion/flow.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <vector>

namespace pixmotion {

MotionMap flow_magnitude(const FlowField& flow) {
  MotionMap out(flow.width(), flow.height());
  for (std::size_t i = 0; i < out.values.size(); ++i) {
    out.valid[i] = flow.valid[i];
    out.values[i] = flow.valid[i] ? std::hypot(flow.du[i], flow.dv[i]) : 0.0;
  }
  return out;
}

namespace {

int clampi(int v, int lo, int hi) { return v < lo ? lo : (v > hi ? hi : v); }

ScalarGrid downsample(const ScalarGrid& src) {
  const int w = src.width();
  const int h = src.height();
  constexpr std::array<double, 5> kTaps = {1.0 / 16, 4.0 / 16, 6.0 / 16, 4.0 / 16, 1.0 / 16};

  ScalarGrid horizontal(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double s = 0.0;
      for (int k = -2; k <= 2; ++k) s += kTaps[k + 2] * src(clampi(x + k, 0, w - 1), y);
      horizontal(x, y) = s;
    }
  }
  const int dw = (w + 1) / 2;
  const int dh = (h + 1) / 2;
  ScalarGrid out(dw, dh);
  for (int y = 0; y < dh; ++y) {
    for (int x = 0; x < dw; ++x) {
      double s = 0.0;
      for (int k = -2; k <= 2; ++k) s += kTaps[k + 2] * horizontal(2 * x, clampi(2 * y + k, 0, h - 1));
      out(x, y) = s;
    }
  }
  return out;
}

double sample_bilinear(const ScalarGrid& g, double x, double y) {
  x = std::clamp(x, 0.0, double(g.width() - 1));
  y = std::clamp(y, 0.0, double(g.height() - 1));
  const int x0 = std::min(static_cast<int>(x), g.width() - 1);
  const int y0 = std::min(static_cast<int>(y), g.height() - 1);
  const int x1 = std::min(x0 + 1, g.width() - 1);
  const int y1 = std::min(y0 + 1, g.height() - 1);
  const double ax = x - x0;
  const double ay = y - y0;
  return (1 - ay) * ((1 - ax) * g(x0, y0) + ax * g(x1, y0)) + ay * ((1 - ax) * g(x0, y1) + ax * g(x1, y1));
}

void median3x3(ScalarGrid& g) {
  const ScalarGrid src = g;
  const int w = g.width();
  const int h = g.height();
  std::array<double, 9> window{};
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      int n = 0;
      for (int dy = -1; dy <= 1; ++dy) {
        for (int dx = -1; dx <= 1; ++dx) window[n++] = src(clampi(x + dx, 0, w - 1), clampi(y + dy, 0, h - 1));
      }
      std::nth_element(window.begin(), window.begin() + 4, window.end());
      g(x, y) = window[4];
    }
  }
}

class PatchCost {
 public:
  PatchCost(const ScalarGrid& a, const ScalarGrid& b, int radius) : a_(a), b_(b), r_(radius) {}

  // Sum of squared differences between the patch around (x, y) in `a` and
  // the patch around (x + dx, y + dy) in `b`, with edge clamping. Stops early
  // (returning a value > bound) once the partial sum exceeds `bound`.
  double operator()(int x, int y, int dx, int dy,
                    double bound = std::numeric_limits<double>::infinity()) const {
    const int w = a_.width();
    const int h = a_.height();
    const bool inside = x - r_ >= 0 && y - r_ >= 0 && x + r_ < w && y + r_ < h && x + dx - r_ >= 0 &&
                        y + dy - r_ >= 0 && x + dx + r_ < w && y + dy + r_ < h;
    double sum = 0.0;
    for (int oy = -r_; oy <= r_; ++oy) {
      if (inside) {
        const double* pa = &a_(x - r_, y + oy);
        const double* pb = &b_(x + dx - r_, y + dy + oy);
        for (int k = 0; k <= 2 * r_; ++k) {
          const double d = pa[k] - pb[k];
          sum += d * d;
        }
      } else {
        const int ya = clampi(y + oy, 0, h - 1);
        const int yb = clampi(y + dy + oy, 0, h - 1);
        for (int ox = -r_; ox <= r_; ++ox) {
          const double d = a_(clampi(x + ox, 0, w - 1), ya) - b_(clampi(x + dx + ox, 0, w - 1), yb);
          sum += d * d;
        }
      }
      if (sum > bound) return sum;
    }
    return sum;
  }

 private:
  const ScalarGrid& a_;
  const ScalarGrid& b_;
  int r_;
};

double parabolic_offset(double minus, double center, double plus) {
  const double denom = minus - 2.0 * center + plus;
  if (!(denom > 0.0)) return 0.0;
  return std::clamp(0.5 * (minus - plus) / denom, -0.5, 0.5);
}

// One pyramid level: search around `prior_u/v` (flow at this level's scale).
void match_level(const ScalarGrid& a, const ScalarGrid& b, const ScalarGrid& prior_u, const ScalarGrid& prior_v,
                 int radius, const BaselineFlowParams& params, ScalarGrid& out_u, ScalarGrid& out_v) {
  const PatchCost cost(a, b, params.patch_radius);
  const int w = a.width();
  const int h = a.height();
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const double pu = prior_u(x, y);
      const double pv = prior_v(x, y);
      const int cu = static_cast<int>(std::lround(pu));
      const int cv = static_cast<int>(std::lround(pv));

      double best = std::numeric_limits<double>::infinity();
      double best_dist = std::numeric_limits<double>::infinity();
      int bu = cu;
      int bv = cv;
      for (int dv = cv - radius; dv <= cv + radius; ++dv) {
        for (int du = cu - radius; du <= cu + radius; ++du) {
          const double c = cost(x, y, du, dv, best);
          if (c > best) continue;
          const double dist = (du - pu) * (du - pu) + (dv - pv) * (dv - pv);
          if (c < best || dist < best_dist) {
            best = c;
            best_dist = dist;
            bu = du;
            bv = dv;
          }
        }
      }

      double su = 0.0;
      double sv = 0.0;
      if (best > 0.0) {
        su = parabolic_offset(cost(x, y, bu - 1, bv), best, cost(x, y, bu + 1, bv));
        sv = parabolic_offset(cost(x, y, bu, bv - 1), best, cost(x, y, bu, bv + 1));
      }
      out_u(x, y) = bu + su;
      out_v(x, y) = bv + sv;
    }
  }
}

}  // namespace

FlowField baseline_flow(const ColorImage& a, const ColorImage& b, const BaselineFlowParams& params) {
  require_same_shape(a, b, "baseline_flow");
  if (params.patch_radius < 0 || params.coarse_radius < 0 || params.refine_radius < 0 || params.max_levels < 1) {
    fail(ErrorKind::kInvalidArgument, "baseline_flow: invalid parameters");
  }
  const int w = a.width();
  const int h = a.height();
  if (w == 0 || h == 0) return FlowField(w, h);

  std::vector<ScalarGrid> pyr_a{to_gray(a)};
  std::vector<ScalarGrid> pyr_b{to_gray(b)};
  while (static_cast<int>(pyr_a.size()) < params.max_levels) {
    const ScalarGrid& top = pyr_a.back();
    if ((top.width() + 1) / 2 < params.min_level_size || (top.height() + 1) / 2 < params.min_level_size) break;
    pyr_a.push_back(downsample(top));
    pyr_b.push_back(downsample(pyr_b.back()));
  }

  const int levels = static_cast<int>(pyr_a.size());
  ScalarGrid flow_u(pyr_a.back().width(), pyr_a.back().height(), 0.0);
  ScalarGrid flow_v = flow_u;
  for (int level = levels - 1; level >= 0; --level) {
    const ScalarGrid& la = pyr_a[level];
    const ScalarGrid& lb = pyr_b[level];
    ScalarGrid prior_u(la.width(), la.height(), 0.0);
    ScalarGrid prior_v = prior_u;
    if (level != levels - 1) {
      for (int y = 0; y < la.height(); ++y) {
        for (int x = 0; x < la.width(); ++x) {
          prior_u(x, y) = 2.0 * sample_bilinear(flow_u, 0.5 * x, 0.5 * y);
          prior_v(x, y) = 2.0 * sample_bilinear(flow_v, 0.5 * x, 0.5 * y);
        }
      }
    }
    const int radius = level == levels - 1 ? params.coarse_radius : params.refine_radius;
    ScalarGrid next_u(la.width(), la.height());
    ScalarGrid next_v(la.width(), la.height());
    match_level(la, lb, prior_u, prior_v, radius, params, next_u, next_v);
    if (params.median_filter) {
      median3x3(next_u);
      median3x3(next_v);
    }
    flow_u = std::move(next_u);
    flow_v = std::move(next_v);
  }

  FlowField flow(w, h);
  flow.du = std::move(flow_u);
  flow.dv = std::move(flow_v);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const double tx = x + flow.du(x, y);
      const double ty = y + flow.dv(x, y);
      flow.valid(x, y) = (tx >= 0.0 && ty >= 0.0 && tx <= w - 1 && ty <= h - 1) ? 1 : 0;
    }
  }
  return flow;
}

FlowField BaselineFlowProvider::compute(const FlowQuery& /*query*/, const ColorImage& current,
                                        const ColorImage& synthesized) const {
  return baseline_flow(current, synthesized, params_);
}

}  // namespace pixmotion
