#include "shapereg/level_lines.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <ostream>
#include <set>

namespace shapereg {

namespace {

// Corners tl=0 tr=1 br=2 bl=3; edge e joins corner e and corner (e+1)%4,
// so T=0 R=1 B=2 L=3.
struct Segment {
  std::int64_t from;
  std::int64_t to;
};

class Contourer {
 public:
  Contourer(const GrayImage& img) : img_(img), w_(img.width()), h_(img.height()) {
    out_.assign(static_cast<std::size_t>(w_) * h_ * 2, -1);
    in_.assign(out_.size(), -1);
  }

  std::vector<LevelLine> run(double level) {
    level_ = level;
    segments_.clear();
    collect();
    for (std::size_t s = 0; s < segments_.size(); ++s) {
      out_[segments_[s].from] = static_cast<int>(s);
      in_[segments_[s].to] = static_cast<int>(s);
    }
    std::vector<LevelLine> lines;
    std::vector<char> used(segments_.size(), 0);
    for (std::size_t s = 0; s < segments_.size(); ++s) {
      if (used[s]) continue;
      LevelLine line = trace(static_cast<int>(s), used);
      if (line.points.size() >= 3 || (!line.closed && line.points.size() >= 2)) lines.push_back(std::move(line));
    }
    for (const auto& seg : segments_) {
      out_[seg.from] = -1;
      in_[seg.to] = -1;
    }
    return lines;
  }

 private:
  bool above(int x, int y) const { return img_.at(x, y) >= level_; }

  std::int64_t horizontal(int x, int y) const { return (static_cast<std::int64_t>(y) * w_ + x) * 2; }
  std::int64_t vertical(int x, int y) const { return (static_cast<std::int64_t>(y) * w_ + x) * 2 + 1; }

  Point crossing(std::int64_t id) const {
    const std::int64_t cell = id / 2;
    const int x = static_cast<int>(cell % w_), y = static_cast<int>(cell / w_);
    const double v0 = img_.at(x, y);
    if (id % 2 == 0) {
      const double v1 = img_.at(x + 1, y);
      return {x + (level_ - v0) / (v1 - v0), static_cast<double>(y)};
    }
    const double v1 = img_.at(x, y + 1);
    return {static_cast<double>(x), y + (level_ - v0) / (v1 - v0)};
  }

  void collect() {
    for (int y = 0; y + 1 < h_; ++y) {
      for (int x = 0; x + 1 < w_; ++x) {
        const bool up[4] = {above(x, y), above(x + 1, y), above(x + 1, y + 1), above(x, y + 1)};
        const int mask = up[0] | (up[1] << 1) | (up[2] << 2) | (up[3] << 3);
        if (mask == 0 || mask == 15) continue;
        const std::int64_t edge_id[4] = {horizontal(x, y), vertical(x + 1, y), horizontal(x, y + 1),
                                         vertical(x, y)};
        auto emit = [&](int a, int b) {
          if (!up[(b + 1) % 4]) std::swap(a, b);
          segments_.push_back({edge_id[a], edge_id[b]});
        };
        if (mask == 5 || mask == 10) {
          const double centre = 0.25 * (img_.at(x, y) + img_.at(x + 1, y) + img_.at(x + 1, y + 1) +
                                        img_.at(x, y + 1));
          // Above corners joined through the centre: cut off the below ones.
          const bool cut_value = !(centre >= level_);
          for (int k = 0; k < 4; ++k) {
            if (up[k] == cut_value) emit((k + 3) % 4, k);
          }
          continue;
        }
        int e[2], n = 0;
        for (int k = 0; k < 4; ++k) {
          if (up[k] != up[(k + 1) % 4]) e[n++] = k;
        }
        emit(e[0], e[1]);
      }
    }
  }

  LevelLine trace(int s, std::vector<char>& used) {
    int start = s;
    bool closed = false;
    for (;;) {
      const int prev = in_[segments_[start].from];
      if (prev < 0) break;
      if (prev == s) {
        closed = true;
        start = s;
        break;
      }
      start = prev;
    }
    LevelLine line;
    line.level = level_;
    line.closed = closed;
    auto push = [&](const Point& p) {
      if (line.points.empty() || (line.points.back() - p).norm() > 1e-12) line.points.push_back(p);
    };
    push(crossing(segments_[start].from));
    int cur = start;
    for (;;) {
      used[cur] = 1;
      const int next = out_[segments_[cur].to];
      if (next < 0) {
        push(crossing(segments_[cur].to));
        break;
      }
      if (next == start) break;
      push(crossing(segments_[cur].to));
      cur = next;
    }
    if (closed && line.points.size() > 1 && (line.points.back() - line.points.front()).norm() <= 1e-12) {
      line.points.pop_back();
    }
    return line;
  }

  const GrayImage& img_;
  int w_, h_;
  double level_ = 0.0;
  std::vector<Segment> segments_;
  std::vector<int> out_, in_;
};

int sign_class(double k, double thr) {
  if (k > thr) return 1;
  if (k < -thr) return -1;
  return 0;
}

int sgn(double v) { return (v > 0.0) - (v < 0.0); }

}  // namespace

std::vector<LevelLine> extract_level_lines(const GrayImage& img, std::span<const double> levels) {
  validate(img);
  std::vector<double> sorted(levels.begin(), levels.end());
  for (double l : sorted) {
    if (!(l >= 0.0 && l <= 255.0)) throw std::invalid_argument("level outside [0, 255]");
  }
  std::sort(sorted.begin(), sorted.end());
  sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());

  Contourer contourer(img);
  std::vector<LevelLine> out;
  for (double level : sorted) {
    auto lines = contourer.run(level);
    std::move(lines.begin(), lines.end(), std::back_inserter(out));
  }
  return out;
}

LevelLine resample_uniform(const LevelLine& line, double spacing) {
  if (!(spacing > 0.0)) throw std::invalid_argument("spacing must be positive");
  if (line.points.size() < 2) throw Error(ErrorCode::DegenerateCurve, "fewer than 2 points");
  const auto& p = line.points;
  const std::size_t n = p.size();
  const std::size_t nseg = line.closed ? n : n - 1;
  std::vector<double> cum(nseg + 1, 0.0);
  for (std::size_t i = 0; i < nseg; ++i) cum[i + 1] = cum[i] + (p[(i + 1) % n] - p[i]).norm();
  const double total = cum.back();
  if (!(total > 1e-12)) throw Error(ErrorCode::DegenerateCurve, "zero-length curve");

  std::size_t count = static_cast<std::size_t>(std::max(1.0, std::round(total / spacing)));
  if (line.closed) count = std::max<std::size_t>(count, 3);
  const double step = total / count;

  LevelLine out;
  out.level = line.level;
  out.closed = line.closed;
  const std::size_t samples = line.closed ? count : count + 1;
  out.points.reserve(samples);
  std::size_t seg = 0;
  for (std::size_t k = 0; k < samples; ++k) {
    if (!line.closed && k + 1 == samples) {
      out.points.push_back(p.back());
      break;
    }
    const double s = k * step;
    while (seg + 1 < nseg && cum[seg + 1] <= s) ++seg;
    const double len = cum[seg + 1] - cum[seg];
    const double t = len > 0.0 ? (s - cum[seg]) / len : 0.0;
    out.points.push_back(p[seg] + t * (p[(seg + 1) % n] - p[seg]));
  }
  return out;
}

CurveAnnotation annotate(const LevelLine& line) {
  const auto& p = line.points;
  const std::size_t n = p.size();
  CurveAnnotation ann;
  ann.curvature.assign(n, 0.0);
  ann.normal.assign(n, Point(0.0, 1.0));
  if (n < 3) return ann;

  auto idx = [&](std::ptrdiff_t i) { return static_cast<std::size_t>((i % static_cast<std::ptrdiff_t>(n) + n) % n); };
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t a, b, c;
    if (line.closed) {
      a = idx(static_cast<std::ptrdiff_t>(i) - 1), b = i, c = idx(static_cast<std::ptrdiff_t>(i) + 1);
    } else {
      b = std::clamp<std::size_t>(i, 1, n - 2);
      a = b - 1, c = b + 1;
    }
    const Point e1 = p[b] - p[a], e2 = p[c] - p[b];
    const double denom = e1.norm() * e2.norm() * (p[c] - p[a]).norm();
    const double k = denom > 0.0 ? 2.0 * cross(e1, e2) / denom : 0.0;
    Point t = p[c] - p[a];
    if (t.norm() == 0.0) t = e2;
    if (t.norm() == 0.0) t = Point(1.0, 0.0);
    const Point ln = left_normal(t.normalized());
    ann.curvature[i] = k;
    ann.normal[i] = k < 0.0 ? Point(-ln) : ln;
  }

  std::vector<double> mags(n);
  for (std::size_t i = 0; i < n; ++i) mags[i] = std::abs(ann.curvature[i]);
  std::nth_element(mags.begin(), mags.begin() + n / 2, mags.end());
  const double thr = 0.25 * mags[n / 2];

  std::vector<int> cls(n);
  for (std::size_t i = 0; i < n; ++i) cls[i] = sign_class(ann.curvature[i], thr);

  // For closed curves, rotate so index 0 starts a class run; then the run
  // structure is independent of where the curve was cut.
  std::size_t shift = 0;
  if (line.closed) {
    bool found = false;
    for (std::size_t i = 0; i < n; ++i) {
      if (cls[i] != cls[idx(static_cast<std::ptrdiff_t>(i) - 1)]) {
        shift = i;
        found = true;
        break;
      }
    }
    if (!found) return ann;
  }
  auto at = [&](std::size_t j) { return (j + shift) % n; };

  struct Run {
    std::size_t begin, end;  // rotated indices, inclusive
    int sign;
  };
  std::vector<Run> runs;
  for (std::size_t j = 0; j < n;) {
    std::size_t k = j;
    while (k + 1 < n && cls[at(k + 1)] == cls[at(j)]) ++k;
    if (cls[at(j)] != 0 && k - j + 1 >= 2) runs.push_back({j, k, cls[at(j)]});
    j = k + 1;
  }

  auto place = [&](const Run& from, const Run& to, bool wrap) {
    // Last raw sign change into the new sign between the two runs.
    const std::size_t lo = from.end + 1;
    const std::size_t hi = wrap ? to.begin + n : to.begin;
    std::size_t best = hi;
    for (std::size_t j = lo; j <= hi; ++j) {
      if (sgn(ann.curvature[at(j % n)]) == to.sign && sgn(ann.curvature[at((j - 1) % n)]) != to.sign) best = j;
    }
    return static_cast<int>(at(best % n));
  };
  for (std::size_t r = 1; r < runs.size(); ++r) {
    if (runs[r].sign != runs[r - 1].sign) ann.inflections.push_back(place(runs[r - 1], runs[r], false));
  }
  if (line.closed && runs.size() >= 2 && runs.back().sign != runs.front().sign) {
    ann.inflections.push_back(place(runs.back(), runs.front(), true));
  }
  std::sort(ann.inflections.begin(), ann.inflections.end());
  return ann;
}

std::vector<double> levels_by_step(int step) {
  if (step <= 0) throw std::invalid_argument("level step must be positive");
  std::vector<double> out;
  for (int l = step; l < 256; l += step) out.push_back(l);
  return out;
}

std::vector<double> levels_around(std::span<const int> centres, int halfwidth) {
  if (halfwidth < 0) throw std::invalid_argument("halfwidth must be non-negative");
  std::set<int> acc;
  for (int c : centres) {
    for (int l = c - halfwidth; l <= c + halfwidth; ++l) {
      if (l >= 0 && l <= 255) acc.insert(l);
    }
  }
  return {acc.begin(), acc.end()};
}

void write_level_lines_csv(std::ostream& os, std::span<const LevelLine> lines) {
  os << "level,line,index,x,y\n";
  for (std::size_t li = 0; li < lines.size(); ++li) {
    const auto& l = lines[li];
    for (std::size_t i = 0; i < l.points.size(); ++i) {
      os << l.level << ',' << li << ',' << i << ',' << l.points[i].x() << ',' << l.points[i].y() << '\n';
    }
  }
}

}  // namespace shapereg
