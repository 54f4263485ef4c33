#ifndef CMEXP_ERROR_HPP
#define CMEXP_ERROR_HPP

#include <stdexcept>
#include <string>

namespace cmexp
{

/// Category of a failure; the CLI maps these onto its exit codes.
enum class ErrorKind {
    invalid_input,       // malformed or contradictory input data
    inconsistent_input,  // inputs that are well formed but do not fit together
    out_of_scope,        // j_E in {0,1728}, residue characteristic below 5, ...
    precision,           // not enough working precision to decide something
    ambiguous_rounding,  // lattice rounding would not be unique
    resource,            // enumeration budget exceeded
    internal             // an invariant of the library itself failed
};

class Error : public std::runtime_error
{
public:
    Error(ErrorKind kind, const std::string &what) : std::runtime_error(what), m_kind(kind) {}
    ErrorKind kind() const noexcept
    {
        return m_kind;
    }

private:
    ErrorKind m_kind;
};

/// Raised when a computation needs more bits; carries a hint for the caller.
class PrecisionError : public Error
{
public:
    PrecisionError(const std::string &what, long required_bits = 0)
        : Error(ErrorKind::precision, what + (required_bits > 0 ? " (try at least " + std::to_string(required_bits) + " bits)" : "")),
          m_required(required_bits)
    {
    }
    long required_bits() const noexcept
    {
        return m_required;
    }

private:
    long m_required;
};

class AmbiguousRounding : public Error
{
public:
    AmbiguousRounding(const std::string &what, long required_bits)
        : Error(ErrorKind::ambiguous_rounding, what), m_required(required_bits)
    {
    }
    long required_bits() const noexcept
    {
        return m_required;
    }

private:
    long m_required;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string &msg)
{
    throw Error(kind, msg);
}

inline void require(bool cond, ErrorKind kind, const char *msg)
{
    if (!cond) {
        fail(kind, msg);
    }
}

inline void require(bool cond, ErrorKind kind, const std::string &msg)
{
    if (!cond) {
        throw Error(kind, msg);
    }
}

} // namespace cmexp

#endif
