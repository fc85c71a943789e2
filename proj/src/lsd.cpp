// Line segment detection by gradient-orientation region growing with
// a-contrario validation. Follows the structure of the reference LSD:
// Gaussian subsampling, 2x2 gradient, pseudo-ordering by gradient
// magnitude, region growing, rectangle approximation, density refinement,
// NFA-driven rectangle improvement.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "roisweep/edges.hpp"
#include "roisweep/errors.hpp"

namespace roisweep {

namespace {

constexpr double kNotDef = -1024.0;
constexpr double kPi = std::numbers::pi;
constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kThreeHalvesPi = 1.5 * std::numbers::pi;
constexpr double kRelativeError = 1000.0 * std::numeric_limits<double>::epsilon();

bool double_equal(double a, double b) {
  if (a == b) return true;
  const double diff = std::abs(a - b);
  const double abs_max = std::max(std::abs(a), std::abs(b));
  const double scale = abs_max < std::numeric_limits<double>::min() ? std::numeric_limits<double>::min() : abs_max;
  return diff / scale <= kRelativeError;
}

double distance(double x1, double y1, double x2, double y2) { return std::hypot(x2 - x1, y2 - y1); }

double angle_diff(double a, double b) {
  a -= b;
  while (a <= -kPi) a += kTwoPi;
  while (a > kPi) a -= kTwoPi;
  return std::abs(a);
}

double angle_diff_signed(double a, double b) {
  a -= b;
  while (a <= -kPi) a += kTwoPi;
  while (a > kPi) a -= kTwoPi;
  return a;
}

bool is_aligned(double pixel_angle, double theta, double prec) {
  if (pixel_angle == kNotDef) return false;
  theta -= pixel_angle;
  if (theta < 0.0) theta = -theta;
  if (theta > kThreeHalvesPi) {
    theta -= kTwoPi;
    if (theta < 0.0) theta = -theta;
  }
  return theta <= prec;
}

/// -log10(NFA) for k aligned points out of n, probability p.
double log_nfa(int n, int k, double p, double log_nt) {
  if (n < 0 || k < 0 || k > n || p <= 0.0 || p >= 1.0) return -log_nt;
  if (n == 0 || k == 0) return -log_nt;
  if (n == k) return -log_nt - static_cast<double>(n) * std::log10(p);

  const double p_term = p / (1.0 - p);
  const double log1term = std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0) +
                          k * std::log(p) + (n - k) * std::log(1.0 - p);
  double term = std::exp(log1term);
  if (double_equal(term, 0.0)) {
    if (k > n * p) return -log1term / std::numbers::ln10 - log_nt;
    return -log_nt;
  }

  double bin_tail = term;
  constexpr double tolerance = 0.1;
  for (int i = k + 1; i <= n; ++i) {
    const double bin_term = static_cast<double>(n - i + 1) / static_cast<double>(i);
    const double mult_term = bin_term * p_term;
    term *= mult_term;
    bin_tail += term;
    if (bin_term < 1.0) {
      const double err = term * ((1.0 - std::pow(mult_term, n - i + 1)) / (1.0 - mult_term) - 1.0);
      if (err < tolerance * std::abs(-std::log10(bin_tail) - log_nt) * bin_tail) break;
    }
  }
  return -std::log10(bin_tail) - log_nt;
}

struct Rect {
  double x1, y1, x2, y2;  // endpoints of the central line
  double width;
  double x, y;  // center
  double theta;
  double dx, dy;
  double prec;
  double p;
};

struct Point {
  int x, y;
};

/// Separable Gaussian filtering and resampling by `scale`.
GrayImage gaussian_sampling(const GrayImage& in, double scale, double sigma_scale) {
  const int w = in.width();
  const int h = in.height();
  const int nw = static_cast<int>(std::ceil(w * scale));
  const int nh = static_cast<int>(std::ceil(h * scale));
  const double sigma = scale < 1.0 ? sigma_scale / scale : sigma_scale;
  constexpr double prec = 3.0;
  const int half = static_cast<int>(std::ceil(sigma * std::sqrt(2.0 * prec * std::log(10.0))));
  const int n = 1 + 2 * half;
  std::vector<double> kernel(static_cast<std::size_t>(n));

  auto make_kernel = [&](double mean) {
    double sum = 0.0;
    for (int i = 0; i < n; ++i) {
      const double v = (i - mean) / sigma;
      kernel[static_cast<std::size_t>(i)] = std::exp(-0.5 * v * v);
      sum += kernel[static_cast<std::size_t>(i)];
    }
    if (sum > 0.0) {
      for (auto& k : kernel) k /= sum;
    }
  };
  auto reflect = [](int j, int size) {
    const int period = 2 * size;
    if (j < 0) j = -1 - j;
    j %= period;
    if (j >= size) j = period - 1 - j;
    return j;
  };

  std::vector<double> aux(static_cast<std::size_t>(nw) * h);
  for (int x = 0; x < nw; ++x) {
    const double xx = x / scale;
    const int xc = static_cast<int>(std::floor(xx + 0.5));
    make_kernel(half + xx - xc);
    for (int y = 0; y < h; ++y) {
      double sum = 0.0;
      for (int i = 0; i < n; ++i) {
        sum += in(reflect(xc - half + i, w), y) * kernel[static_cast<std::size_t>(i)];
      }
      aux[static_cast<std::size_t>(y) * nw + x] = sum;
    }
  }

  GrayImage out(nw, nh);
  for (int y = 0; y < nh; ++y) {
    const double yy = y / scale;
    const int yc = static_cast<int>(std::floor(yy + 0.5));
    make_kernel(half + yy - yc);
    for (int x = 0; x < nw; ++x) {
      double sum = 0.0;
      for (int i = 0; i < n; ++i) {
        sum += aux[static_cast<std::size_t>(reflect(yc - half + i, h)) * nw + x] * kernel[static_cast<std::size_t>(i)];
      }
      out(x, y) = static_cast<float>(sum);
    }
  }
  return out;
}

class Detector {
 public:
  Detector(const GrayImage& image, const LsdParams& params)
      : img_(image), params_(params),
        w_(image.width()), h_(image.height()),
        angles_(static_cast<std::size_t>(w_) * h_, kNotDef),
        magnitude_(static_cast<std::size_t>(w_) * h_, 0.0),
        used_(static_cast<std::size_t>(w_) * h_, 0) {}

  std::vector<LineSegment> run() {
    const double prec = kPi * params_.angle_tolerance_deg / 180.0;
    const double p = params_.angle_tolerance_deg / 180.0;
    const double rho = params_.quant / std::sin(prec);

    std::vector<Point> order = compute_gradient(rho);

    const double log_nt = 5.0 * (std::log10(static_cast<double>(w_)) + std::log10(static_cast<double>(h_))) / 2.0 +
                          std::log10(11.0);
    const double min_region = -log_nt / std::log10(p);

    std::vector<LineSegment> out;
    std::vector<Point> region;
    region.reserve(static_cast<std::size_t>(w_) * h_);
    for (const Point& seed : order) {
      if (used(seed.x, seed.y) || angle(seed.x, seed.y) == kNotDef) continue;

      double region_angle = 0.0;
      grow_region(seed, prec, region, region_angle);
      if (static_cast<double>(region.size()) < min_region) continue;

      Rect rect = region_to_rect(region, region_angle, prec, p);
      if (!refine(region, region_angle, rect, prec, p)) continue;

      const double nfa = improve_rect(rect, log_nt);
      if (nfa <= params_.log_eps) continue;

      // The 2x2 gradient lives at pixel corners; shift to pixel-center coordinates.
      LineSegment seg{rect.x1 + 0.5, rect.y1 + 0.5, rect.x2 + 0.5, rect.y2 + 0.5, rect.width, nfa};
      if (params_.scale != 1.0) {
        seg.x0 /= params_.scale;
        seg.y0 /= params_.scale;
        seg.x1 /= params_.scale;
        seg.y1 /= params_.scale;
        seg.width /= params_.scale;
      }
      out.push_back(seg);
    }
    return out;
  }

 private:
  std::size_t idx(int x, int y) const { return static_cast<std::size_t>(y) * w_ + x; }
  double angle(int x, int y) const { return angles_[idx(x, y)]; }
  bool used(int x, int y) const { return used_[idx(x, y)] != 0; }

  std::vector<Point> compute_gradient(double threshold) {
    double max_grad = 0.0;
    for (int y = 0; y + 1 < h_; ++y) {
      for (int x = 0; x + 1 < w_; ++x) {
        const double com1 = static_cast<double>(img_(x + 1, y + 1)) - img_(x, y);
        const double com2 = static_cast<double>(img_(x + 1, y)) - img_(x, y + 1);
        const double gx = com1 + com2;
        const double gy = com1 - com2;
        const double norm = std::sqrt((gx * gx + gy * gy) / 4.0);
        magnitude_[idx(x, y)] = norm;
        if (norm <= threshold) continue;
        angles_[idx(x, y)] = std::atan2(gx, -gy);
        max_grad = std::max(max_grad, norm);
      }
    }

    // Pseudo-order: coarse bins by magnitude, strongest first, scan order within a bin.
    const int bins = std::max(1, params_.n_bins);
    std::vector<std::vector<Point>> buckets(static_cast<std::size_t>(bins));
    for (int y = 0; y + 1 < h_; ++y) {
      for (int x = 0; x + 1 < w_; ++x) {
        if (angles_[idx(x, y)] == kNotDef) continue;
        int b = static_cast<int>(magnitude_[idx(x, y)] * bins / max_grad);
        b = std::min(b, bins - 1);
        buckets[static_cast<std::size_t>(b)].push_back({x, y});
      }
    }
    std::vector<Point> order;
    for (int b = bins - 1; b >= 0; --b) {
      const auto& bucket = buckets[static_cast<std::size_t>(b)];
      order.insert(order.end(), bucket.begin(), bucket.end());
    }
    return order;
  }

  void grow_region(Point seed, double prec, std::vector<Point>& region, double& region_angle) {
    region.clear();
    region.push_back(seed);
    region_angle = angle(seed.x, seed.y);
    double sum_dx = std::cos(region_angle);
    double sum_dy = std::sin(region_angle);
    used_[idx(seed.x, seed.y)] = 1;

    for (std::size_t i = 0; i < region.size(); ++i) {
      const Point c = region[i];
      for (int yy = c.y - 1; yy <= c.y + 1; ++yy) {
        for (int xx = c.x - 1; xx <= c.x + 1; ++xx) {
          if (xx < 0 || yy < 0 || xx >= w_ || yy >= h_) continue;
          if (used(xx, yy) || !is_aligned(angle(xx, yy), region_angle, prec)) continue;
          used_[idx(xx, yy)] = 1;
          region.push_back({xx, yy});
          sum_dx += std::cos(angle(xx, yy));
          sum_dy += std::sin(angle(xx, yy));
          region_angle = std::atan2(sum_dy, sum_dx);
        }
      }
    }
  }

  Rect region_to_rect(const std::vector<Point>& region, double region_angle, double prec, double p) const {
    double x = 0.0, y = 0.0, sum = 0.0;
    for (const Point& pt : region) {
      const double weight = magnitude_[idx(pt.x, pt.y)];
      x += pt.x * weight;
      y += pt.y * weight;
      sum += weight;
    }
    x /= sum;
    y /= sum;

    double ixx = 0.0, iyy = 0.0, ixy = 0.0;
    for (const Point& pt : region) {
      const double weight = magnitude_[idx(pt.x, pt.y)];
      ixx += (pt.y - y) * (pt.y - y) * weight;
      iyy += (pt.x - x) * (pt.x - x) * weight;
      ixy -= (pt.x - x) * (pt.y - y) * weight;
    }
    const double lambda = 0.5 * (ixx + iyy - std::sqrt((ixx - iyy) * (ixx - iyy) + 4.0 * ixy * ixy));
    double theta = std::abs(ixx) > std::abs(iyy) ? std::atan2(lambda - ixx, ixy) : std::atan2(ixy, lambda - iyy);
    if (angle_diff(theta, region_angle) > prec) theta += kPi;

    const double dx = std::cos(theta);
    const double dy = std::sin(theta);
    double l_min = 0.0, l_max = 0.0, w_min = 0.0, w_max = 0.0;
    for (const Point& pt : region) {
      const double l = (pt.x - x) * dx + (pt.y - y) * dy;
      const double w = -(pt.x - x) * dy + (pt.y - y) * dx;
      l_min = std::min(l_min, l);
      l_max = std::max(l_max, l);
      w_min = std::min(w_min, w);
      w_max = std::max(w_max, w);
    }

    Rect r{};
    r.x1 = x + l_min * dx;
    r.y1 = y + l_min * dy;
    r.x2 = x + l_max * dx;
    r.y2 = y + l_max * dy;
    r.width = std::max(1.0, w_max - w_min);
    r.x = x;
    r.y = y;
    r.theta = theta;
    r.dx = dx;
    r.dy = dy;
    r.prec = prec;
    r.p = p;
    return r;
  }

  double density(const std::vector<Point>& region, const Rect& r) const {
    return static_cast<double>(region.size()) / (distance(r.x1, r.y1, r.x2, r.y2) * r.width);
  }

  bool reduce_radius(std::vector<Point>& region, double region_angle, Rect& rect, double prec, double p) {
    double dens = density(region, rect);
    if (dens >= params_.density_threshold) return true;

    const Point seed = region.front();
    double radius = std::max(distance(seed.x, seed.y, rect.x1, rect.y1), distance(seed.x, seed.y, rect.x2, rect.y2));
    while (dens < params_.density_threshold) {
      radius *= 0.75;
      std::vector<Point> kept;
      kept.reserve(region.size());
      for (const Point& pt : region) {
        if (distance(seed.x, seed.y, pt.x, pt.y) > radius) {
          used_[idx(pt.x, pt.y)] = 0;
        } else {
          kept.push_back(pt);
        }
      }
      region.swap(kept);
      if (region.size() < 2) return false;
      rect = region_to_rect(region, region_angle, prec, p);
      dens = density(region, rect);
    }
    return true;
  }

  bool refine(std::vector<Point>& region, double& region_angle, Rect& rect, double prec, double p) {
    if (density(region, rect) >= params_.density_threshold) return true;

    // Re-estimate the angle tolerance from points near the seed.
    const Point seed = region.front();
    const double seed_angle = angle(seed.x, seed.y);
    double sum = 0.0, sq_sum = 0.0;
    int n = 0;
    for (const Point& pt : region) {
      used_[idx(pt.x, pt.y)] = 0;
      if (distance(seed.x, seed.y, pt.x, pt.y) < rect.width) {
        const double d = angle_diff_signed(angle(pt.x, pt.y), seed_angle);
        sum += d;
        sq_sum += d * d;
        ++n;
      }
    }
    const double mean = n > 0 ? sum / n : 0.0;
    const double tau = n > 0 ? 2.0 * std::sqrt(std::max(0.0, (sq_sum - 2.0 * mean * sum) / n + mean * mean)) : prec;

    grow_region(seed, tau, region, region_angle);
    if (region.size() < 2) return false;
    rect = region_to_rect(region, region_angle, prec, p);
    if (density(region, rect) < params_.density_threshold) {
      return reduce_radius(region, region_angle, rect, prec, p);
    }
    return true;
  }

  double rect_nfa(const Rect& r, double log_nt) const {
    const double half_width = r.width / 2.0;
    const double length = distance(r.x1, r.y1, r.x2, r.y2);
    const double mx = 0.5 * (r.x1 + r.x2);
    const double my = 0.5 * (r.y1 + r.y2);

    const double ox = std::abs(r.dy) * half_width;
    const double oy = std::abs(r.dx) * half_width;
    const int xmin = std::max(0, static_cast<int>(std::floor(std::min(r.x1, r.x2) - ox)));
    const int xmax = std::min(w_ - 1, static_cast<int>(std::ceil(std::max(r.x1, r.x2) + ox)));
    const int ymin = std::max(0, static_cast<int>(std::floor(std::min(r.y1, r.y2) - oy)));
    const int ymax = std::min(h_ - 1, static_cast<int>(std::ceil(std::max(r.y1, r.y2) + oy)));

    int total = 0;
    int aligned = 0;
    for (int y = ymin; y <= ymax; ++y) {
      for (int x = xmin; x <= xmax; ++x) {
        const double l = (x - mx) * r.dx + (y - my) * r.dy;
        const double w = -(x - mx) * r.dy + (y - my) * r.dx;
        if (std::abs(l) > length / 2.0 || std::abs(w) > half_width) continue;
        ++total;
        if (is_aligned(angle(x, y), r.theta, r.prec)) ++aligned;
      }
    }
    return log_nfa(total, aligned, r.p, log_nt);
  }

  double improve_rect(Rect& rect, double log_nt) const {
    constexpr double delta = 0.5;
    constexpr double delta_2 = delta / 2.0;

    double best = rect_nfa(rect, log_nt);
    if (best > params_.log_eps) return best;

    // Finer angular precision.
    Rect r = rect;
    for (int n = 0; n < 5; ++n) {
      r.p /= 2.0;
      r.prec = r.p * kPi;
      const double v = rect_nfa(r, log_nt);
      if (v > best) {
        best = v;
        rect = r;
      }
    }
    if (best > params_.log_eps) return best;

    // Thinner rectangle.
    r = rect;
    for (int n = 0; n < 5; ++n) {
      if (r.width - delta >= 0.5) {
        r.width -= delta;
        const double v = rect_nfa(r, log_nt);
        if (v > best) {
          best = v;
          rect = r;
        }
      }
    }
    if (best > params_.log_eps) return best;

    // Trim one side, then the other.
    for (int side : {1, -1}) {
      r = rect;
      for (int n = 0; n < 5; ++n) {
        if (r.width - delta >= 0.5) {
          r.x1 += side * -r.dy * delta_2;
          r.y1 += side * r.dx * delta_2;
          r.x2 += side * -r.dy * delta_2;
          r.y2 += side * r.dx * delta_2;
          r.width -= delta;
          const double v = rect_nfa(r, log_nt);
          if (v > best) {
            best = v;
            rect = r;
          }
        }
      }
      if (best > params_.log_eps) return best;
    }

    // Finer precision once more.
    r = rect;
    for (int n = 0; n < 5; ++n) {
      r.p /= 2.0;
      r.prec = r.p * kPi;
      const double v = rect_nfa(r, log_nt);
      if (v > best) {
        best = v;
        rect = r;
      }
    }
    return best;
  }

  const GrayImage& img_;
  const LsdParams& params_;
  int w_;
  int h_;
  std::vector<double> angles_;
  std::vector<double> magnitude_;
  std::vector<std::uint8_t> used_;
};

}  // namespace

std::vector<LineSegment> detect_lines(const GrayImage& image, const LsdParams& params) {
  if (image.empty()) {
    throw Error(ErrorCode::InvalidArgument, "line detection needs a nonempty image");
  }
  if (!(params.scale > 0.0) || !(params.angle_tolerance_deg > 0.0) || params.angle_tolerance_deg >= 180.0) {
    throw Error(ErrorCode::InvalidArgument, "invalid line detector parameters");
  }
  if (params.scale != 1.0) {
    const GrayImage scaled = gaussian_sampling(image, params.scale, params.sigma_scale);
    if (scaled.width() < 2 || scaled.height() < 2) return {};
    return Detector(scaled, params).run();
  }
  if (image.width() < 2 || image.height() < 2) return {};
  return Detector(image, params).run();
}

}  // namespace roisweep
