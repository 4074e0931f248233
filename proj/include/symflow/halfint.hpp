#pragma once

#include <cstdint>
#include <compare>
#include <ostream>
#include <stdexcept>
#include <string>

namespace symflow {

// Exact half-integer, stored as the doubled value. All index/grading
// arithmetic goes through this type; no float ever carries a grading.
struct HalfInt {
    std::int64_t twice = 0;

    constexpr HalfInt() = default;
    constexpr explicit HalfInt(std::int64_t doubled) : twice(doubled) {}

    static constexpr HalfInt whole(std::int64_t n) { return HalfInt{2 * n}; }
    static constexpr HalfInt halves(std::int64_t n) { return HalfInt{n}; }

    constexpr bool is_integer() const { return twice % 2 == 0; }
    constexpr std::int64_t as_integer() const {
        if (!is_integer()) throw std::logic_error("HalfInt: not an integer");
        return twice / 2;
    }
    constexpr double value() const { return static_cast<double>(twice) / 2.0; }

    friend constexpr HalfInt operator+(HalfInt a, HalfInt b) { return HalfInt{a.twice + b.twice}; }
    friend constexpr HalfInt operator-(HalfInt a, HalfInt b) { return HalfInt{a.twice - b.twice}; }
    friend constexpr HalfInt operator-(HalfInt a) { return HalfInt{-a.twice}; }
    friend constexpr HalfInt operator*(std::int64_t k, HalfInt a) { return HalfInt{k * a.twice}; }
    constexpr HalfInt& operator+=(HalfInt o) { twice += o.twice; return *this; }
    constexpr HalfInt& operator-=(HalfInt o) { twice -= o.twice; return *this; }

    friend constexpr auto operator<=>(HalfInt, HalfInt) = default;

    std::string str() const {
        if (is_integer()) return std::to_string(twice / 2);
        return std::to_string(twice) + "/2";
    }

    friend std::ostream& operator<<(std::ostream& os, HalfInt h) { return os << h.str(); }
};

}  // namespace symflow
