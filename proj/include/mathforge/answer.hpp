#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>

namespace mathforge {

// Signed arbitrary-precision integer over a decimal-digit magnitude.
// Supports exactly what exact answer comparison needs: compare, add,
// subtract, multiply, and scaling by powers of ten. No division.
class BigInt {
public:
    BigInt() = default;

    // Accepts [+-]?[0-9]+. Returns nullopt for anything else.
    static std::optional<BigInt> parse(std::string_view s);
    static BigInt from_ll(long long v);
    static BigInt pow10(int k);

    bool is_zero() const { return mag_ == "0"; }
    bool negative() const { return neg_; }
    const std::string& magnitude() const { return mag_; }

    std::string str() const;
    BigInt abs_value() const;
    BigInt times_pow10(int k) const;

    friend BigInt operator+(const BigInt& a, const BigInt& b);
    friend BigInt operator-(const BigInt& a, const BigInt& b);
    friend BigInt operator*(const BigInt& a, const BigInt& b);

    // -1, 0, or 1 as a <, ==, > b.
    friend int compare(const BigInt& a, const BigInt& b);

    bool operator==(const BigInt& o) const { return neg_ == o.neg_ && mag_ == o.mag_; }
    bool operator!=(const BigInt& o) const { return !(*this == o); }

private:
    static int cmp_mag(const std::string& a, const std::string& b);
    static std::string add_mag(const std::string& a, const std::string& b);
    static std::string sub_mag(const std::string& a, const std::string& b);  // requires a >= b
    static std::string mul_mag(const std::string& a, const std::string& b);
    static BigInt make(bool neg, std::string mag);

    bool neg_ = false;
    std::string mag_ = "0";  // no leading zeros; "0" is never negative
};

struct IntegerValue {
    BigInt value;
    bool operator==(const IntegerValue&) const = default;
};

// Lowest terms, den > 0. Values that reduce to den == 1 are canonicalized
// to IntegerValue by normalize(), so a RationalValue always has den >= 2.
struct RationalValue {
    long long num = 0;
    long long den = 1;
    bool operator==(const RationalValue&) const = default;
};

// value = (negative ? -1 : 1) * digits * 10^exponent. Canonical form keeps
// exponent < 0 and digits free of leading/trailing zeros; integral values
// are promoted to IntegerValue by normalize().
struct DecimalValue {
    bool negative = false;
    std::string digits = "0";
    int exponent = 0;
    bool operator==(const DecimalValue&) const = default;
};

struct ExpressionValue {
    std::string text;
    bool operator==(const ExpressionValue&) const = default;
};

enum class AnswerKind { Integer, Rational, Decimal, Expression };

std::string to_string(AnswerKind kind);

struct CanonicalAnswer {
    std::variant<IntegerValue, RationalValue, DecimalValue, ExpressionValue> value{IntegerValue{}};
    std::string raw;  // text as extracted, before normalization

    AnswerKind kind() const;
    bool is_numeric() const { return kind() != AnswerKind::Expression; }

    // Deterministic rendering; normalize(str()) reproduces the same value.
    std::string str() const;

    // Structural equality of the canonical value; raw is ignored.
    bool same_value(const CanonicalAnswer& other) const { return value == other.value; }
};

class EmptyAfterNormalization : public std::runtime_error {
public:
    explicit EmptyAfterNormalization(const std::string& raw)
        : std::runtime_error("answer is empty after normalization: \"" + raw + "\"") {}
};

// Canonicalizes an extracted answer string: strips $ / \boxed{} / \text{}
// wrappers, thousands commas, a leading +, and a trailing % (p% becomes
// p/100); classifies the result as Integer, Rational, Decimal, or Expression.
// Throws EmptyAfterNormalization when nothing is left.
CanonicalAnswer normalize(std::string_view raw);
std::optional<CanonicalAnswer> try_normalize(std::string_view raw);

// Integer/Rational/Decimal compare exactly over the rationals; a mismatch
// involving a Decimal additionally passes at relative tolerance 1e-6
// (evaluated in exact integer arithmetic). Expressions compare by
// normalized string equality and never equal a numeric answer.
bool answers_equivalent(const CanonicalAnswer& a, const CanonicalAnswer& b);

}  // namespace mathforge
