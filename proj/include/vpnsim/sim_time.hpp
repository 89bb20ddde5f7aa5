#pragma once

#include <cmath>
#include <compare>
#include <cstdint>
#include <cstdio>
#include <string>

namespace vpnsim {

/// Simulated time in integer nanoseconds since the start of a run.
class SimTime {
public:
    constexpr SimTime() = default;
    constexpr explicit SimTime(std::int64_t ns) : ns_(ns) {}

    static SimTime from_seconds(double s) { return SimTime(std::llround(s * 1e9)); }
    static constexpr SimTime from_ms(std::int64_t ms) { return SimTime(ms * 1'000'000); }
    static constexpr SimTime max() { return SimTime(INT64_MAX); }

    constexpr std::int64_t ns() const { return ns_; }
    constexpr double seconds() const { return static_cast<double>(ns_) * 1e-9; }

    constexpr SimTime operator+(SimTime o) const { return SimTime(ns_ + o.ns_); }
    constexpr SimTime operator-(SimTime o) const { return SimTime(ns_ - o.ns_); }
    constexpr SimTime operator*(std::int64_t k) const { return SimTime(ns_ * k); }
    constexpr SimTime& operator+=(SimTime o) { ns_ += o.ns_; return *this; }

    constexpr auto operator<=>(const SimTime&) const = default;

private:
    std::int64_t ns_ = 0;
};

/// Exact decimal rendering "S.NNNNNNNNN" of a time value.
inline std::string format_seconds(SimTime t)
{
    const std::int64_t ns = t.ns();
    const char* sign = ns < 0 ? "-" : "";
    const std::int64_t a = ns < 0 ? -ns : ns;
    char buf[48];
    std::snprintf(buf, sizeof buf, "%s%lld.%09lld", sign, static_cast<long long>(a / 1'000'000'000),
                  static_cast<long long>(a % 1'000'000'000));
    return buf;
}

}  // namespace vpnsim
