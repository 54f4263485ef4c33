#ifndef CMEXP_CERTIFICATE_HPP
#define CMEXP_CERTIFICATE_HPP

#include <map>
#include <optional>
#include <string>

#include <cmexp/rational.hpp>

namespace cmexp
{

enum class Provenance
{
    vertical,
    horizontal,
    combined
};

inline const char *to_string(Provenance p)
{
    switch (p) {
    case Provenance::vertical:
        return "vertical";
    case Provenance::horizontal:
        return "horizontal";
    case Provenance::combined:
        return "combined";
    }
    return "?";
}

/// Per-prime exponent rate r and the values it was assembled from.
struct PrimeEntry
{
    Rational r;
    std::string triggers;               // which of N, j, j-1728 the prime divides
    Provenance provenance = Provenance::vertical;
    Rational v_a;                       // max nu(j_E - j0) over applicable j0
    std::optional<Rational> v_d_vert;   // v_vert bound, when p | N
    std::optional<long> e_den;          // when p | N
    Rational vertical;                  // e_den * v_d_vert, or 0
    std::optional<bool> horizontal_contained; // outcome of the horizontal test, when run
    std::string note;
};

/// C^[n] = prod_p p^ceil(n r_p).
struct DenominatorCertificate
{
    std::map<Integer, PrimeEntry> entries;

    Integer exponent(const Integer &p, long n) const
    {
        auto it = entries.find(p);
        if (it == entries.end()) {
            return 0;
        }
        return ceil_of(it->second.r * n);
    }
    Integer C(long n) const
    {
        require(n >= 0, ErrorKind::invalid_input, "C^[n] needs n >= 0");
        Integer c = 1;
        for (const auto &[p, e] : entries) {
            c *= pow(p, static_cast<unsigned long>(to_long(ceil_of(e.r * n))));
        }
        return c;
    }
    /// "5^(5/4) * 7^(1/2)", or "1".
    std::string symbolic() const
    {
        std::string s;
        for (const auto &[p, e] : entries) {
            if (e.r == 0) {
                continue;
            }
            if (!s.empty()) {
                s += " * ";
            }
            s += to_string(p) + "^(" + to_string(e.r) + ")";
        }
        return s.empty() ? "1" : s;
    }
};

} // namespace cmexp

#endif
