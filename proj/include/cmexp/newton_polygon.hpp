#ifndef CMEXP_NEWTON_POLYGON_HPP
#define CMEXP_NEWTON_POLYGON_HPP

#include <algorithm>
#include <map>
#include <optional>
#include <utility>
#include <vector>

#include <cmexp/rational.hpp>

namespace cmexp
{

/// A point (x, y) where y is a valuation; std::nullopt stands for infinity.
using ValuationPoint = std::pair<long, std::optional<Rational>>;

/// Lower convex hull of (index, valuation) points.
///
/// Edge slope convention: the edge from (x1, y1) to (x2, y2), x1 < x2, has
/// slope (y1 - y2) / (x2 - x1), the common valuation of the corresponding
/// roots. Read left to right these slopes strictly decrease.
class NewtonPolygon
{
public:
    explicit NewtonPolygon(std::vector<std::pair<long, Rational>> vertices) : m_v(std::move(vertices)) {}

    const std::vector<std::pair<long, Rational>> &vertices() const noexcept
    {
        return m_v;
    }
    std::vector<Rational> slopes() const
    {
        std::vector<Rational> s;
        for (std::size_t i = 1; i < m_v.size(); ++i) {
            s.push_back((m_v[i - 1].second - m_v[i].second) / (m_v[i].first - m_v[i - 1].first));
        }
        return s;
    }
    /// Largest finite slope; zero for a single vertex.
    Rational largest_slope() const
    {
        auto s = slopes();
        return s.empty() ? Rational(0) : *std::max_element(s.begin(), s.end());
    }
    bool has_vertex(long x, const Rational &y) const
    {
        return std::any_of(m_v.begin(), m_v.end(), [&](const auto &v) { return v.first == x && v.second == y; });
    }
    bool has_vertex_at(long x) const
    {
        return std::any_of(m_v.begin(), m_v.end(), [&](const auto &v) { return v.first == x; });
    }
    /// Height of the hull above x, for x within the hull's range.
    Rational value_at(long x) const
    {
        require(!m_v.empty() && x >= m_v.front().first && x <= m_v.back().first, ErrorKind::invalid_input, "abscissa outside the polygon");
        for (std::size_t i = 0; i + 1 < m_v.size(); ++i) {
            const auto &[x1, y1] = m_v[i];
            const auto &[x2, y2] = m_v[i + 1];
            if (x >= x1 && x <= x2) {
                return y1 + (y2 - y1) * ratio(x - x1, x2 - x1);
            }
        }
        return m_v.back().second;
    }
    /// Every given finite point lies on or above the hull, and consecutive
    /// slopes strictly decrease.
    bool is_lower_convex_hull_of(const std::vector<ValuationPoint> &pts) const
    {
        auto s = slopes();
        for (std::size_t i = 1; i < s.size(); ++i) {
            if (!(s[i] < s[i - 1])) {
                return false;
            }
        }
        for (const auto &[x, y] : pts) {
            if (y && x >= m_v.front().first && x <= m_v.back().first && *y < value_at(x)) {
                return false;
            }
        }
        return true;
    }

private:
    std::vector<std::pair<long, Rational>> m_v;
};

/// Lower hull by a monotone chain with exact rational cross products.
inline NewtonPolygon newton_polygon(const std::vector<ValuationPoint> &points)
{
    std::map<long, Rational> best;
    for (const auto &[x, y] : points) {
        if (!y) {
            continue;
        }
        auto it = best.find(x);
        if (it == best.end() || *y < it->second) {
            best[x] = *y;
        }
    }
    require(!best.empty(), ErrorKind::invalid_input, "Newton polygon needs at least one finite point");
    std::vector<std::pair<long, Rational>> hull;
    for (const auto &pt : best) {
        while (hull.size() >= 2) {
            const auto &a = hull[hull.size() - 2];
            const auto &b = hull.back();
            // cross((b - a), (pt - a)) <= 0 means b is on or above segment a-pt
            Rational cross = Rational(b.first - a.first) * (pt.second - a.second) - (b.second - a.second) * Rational(pt.first - a.first);
            if (cross <= 0) {
                hull.pop_back();
            } else {
                break;
            }
        }
        hull.push_back(pt);
    }
    return NewtonPolygon(std::move(hull));
}

} // namespace cmexp

#endif
