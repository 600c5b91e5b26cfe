#include "mathforge/answer.hpp"

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <numeric>

#include "mathforge/text.hpp"

namespace mathforge {

// ---------------------------------------------------------------- BigInt

BigInt BigInt::make(bool neg, std::string mag) {
    std::size_t i = 0;
    while (i + 1 < mag.size() && mag[i] == '0') ++i;
    mag.erase(0, i);
    BigInt r;
    r.mag_ = mag.empty() ? "0" : std::move(mag);
    r.neg_ = neg && r.mag_ != "0";
    return r;
}

std::optional<BigInt> BigInt::parse(std::string_view s) {
    if (s.empty()) return std::nullopt;
    bool neg = false;
    std::size_t i = 0;
    if (s[0] == '+' || s[0] == '-') {
        neg = s[0] == '-';
        i = 1;
    }
    if (i == s.size()) return std::nullopt;
    for (std::size_t j = i; j < s.size(); ++j) {
        if (!std::isdigit(static_cast<unsigned char>(s[j]))) return std::nullopt;
    }
    return make(neg, std::string(s.substr(i)));
}

BigInt BigInt::from_ll(long long v) {
    bool neg = v < 0;
    // negate via unsigned to survive LLONG_MIN
    unsigned long long mag = neg ? 0ull - static_cast<unsigned long long>(v) : static_cast<unsigned long long>(v);
    return make(neg, std::to_string(mag));
}

BigInt BigInt::pow10(int k) {
    BigInt r;
    r.mag_ = "1" + std::string(static_cast<std::size_t>(std::max(k, 0)), '0');
    return r;
}

std::string BigInt::str() const { return neg_ ? "-" + mag_ : mag_; }

BigInt BigInt::abs_value() const {
    BigInt r = *this;
    r.neg_ = false;
    return r;
}

BigInt BigInt::times_pow10(int k) const {
    if (is_zero() || k <= 0) return *this;
    BigInt r = *this;
    r.mag_.append(static_cast<std::size_t>(k), '0');
    return r;
}

int BigInt::cmp_mag(const std::string& a, const std::string& b) {
    if (a.size() != b.size()) return a.size() < b.size() ? -1 : 1;
    int c = a.compare(b);
    return c < 0 ? -1 : (c > 0 ? 1 : 0);
}

std::string BigInt::add_mag(const std::string& a, const std::string& b) {
    std::string out;
    out.reserve(std::max(a.size(), b.size()) + 1);
    int carry = 0;
    auto ia = a.rbegin();
    auto ib = b.rbegin();
    while (ia != a.rend() || ib != b.rend() || carry) {
        int s = carry;
        if (ia != a.rend()) s += *ia++ - '0';
        if (ib != b.rend()) s += *ib++ - '0';
        out.push_back(static_cast<char>('0' + s % 10));
        carry = s / 10;
    }
    std::reverse(out.begin(), out.end());
    return out;
}

std::string BigInt::sub_mag(const std::string& a, const std::string& b) {
    std::string out;
    out.reserve(a.size());
    int borrow = 0;
    auto ia = a.rbegin();
    auto ib = b.rbegin();
    while (ia != a.rend()) {
        int d = (*ia++ - '0') - borrow - (ib != b.rend() ? *ib++ - '0' : 0);
        if (d < 0) {
            d += 10;
            borrow = 1;
        } else {
            borrow = 0;
        }
        out.push_back(static_cast<char>('0' + d));
    }
    std::reverse(out.begin(), out.end());
    return out;
}

std::string BigInt::mul_mag(const std::string& a, const std::string& b) {
    if (a == "0" || b == "0") return "0";
    std::vector<int> acc(a.size() + b.size(), 0);
    for (std::size_t i = 0; i < a.size(); ++i) {
        int da = a[a.size() - 1 - i] - '0';
        int carry = 0;
        for (std::size_t j = 0; j < b.size(); ++j) {
            int db = b[b.size() - 1 - j] - '0';
            int cur = acc[i + j] + da * db + carry;
            acc[i + j] = cur % 10;
            carry = cur / 10;
        }
        std::size_t k = i + b.size();
        while (carry) {
            int cur = acc[k] + carry;
            acc[k] = cur % 10;
            carry = cur / 10;
            ++k;
        }
    }
    std::string out;
    out.reserve(acc.size());
    for (auto it = acc.rbegin(); it != acc.rend(); ++it) out.push_back(static_cast<char>('0' + *it));
    return BigInt::make(false, std::move(out)).magnitude();
}

BigInt operator+(const BigInt& a, const BigInt& b) {
    if (a.neg_ == b.neg_) return BigInt::make(a.neg_, BigInt::add_mag(a.mag_, b.mag_));
    int c = BigInt::cmp_mag(a.mag_, b.mag_);
    if (c == 0) return BigInt{};
    if (c > 0) return BigInt::make(a.neg_, BigInt::sub_mag(a.mag_, b.mag_));
    return BigInt::make(b.neg_, BigInt::sub_mag(b.mag_, a.mag_));
}

BigInt operator-(const BigInt& a, const BigInt& b) {
    BigInt nb = b;
    if (!nb.is_zero()) nb.neg_ = !nb.neg_;
    return a + nb;
}

BigInt operator*(const BigInt& a, const BigInt& b) {
    return BigInt::make(a.neg_ != b.neg_, BigInt::mul_mag(a.mag_, b.mag_));
}

int compare(const BigInt& a, const BigInt& b) {
    if (a.neg_ != b.neg_) return a.neg_ ? -1 : 1;
    int c = BigInt::cmp_mag(a.mag_, b.mag_);
    return a.neg_ ? -c : c;
}

// ------------------------------------------------------- CanonicalAnswer

std::string to_string(AnswerKind kind) {
    switch (kind) {
        case AnswerKind::Integer: return "integer";
        case AnswerKind::Rational: return "rational";
        case AnswerKind::Decimal: return "decimal";
        case AnswerKind::Expression: return "expression";
    }
    return "expression";
}

AnswerKind CanonicalAnswer::kind() const {
    return static_cast<AnswerKind>(value.index());
}

std::string CanonicalAnswer::str() const {
    if (const auto* i = std::get_if<IntegerValue>(&value)) return i->value.str();
    if (const auto* r = std::get_if<RationalValue>(&value))
        return std::to_string(r->num) + "/" + std::to_string(r->den);
    if (const auto* d = std::get_if<DecimalValue>(&value)) {
        std::string out = d->negative ? "-" : "";
        int frac = -d->exponent;
        const std::string& dg = d->digits;
        if (frac <= 0) {
            out += dg;  // non-canonical but renderable
            out.append(static_cast<std::size_t>(d->exponent), '0');
        } else if (dg.size() > static_cast<std::size_t>(frac)) {
            out += dg.substr(0, dg.size() - frac) + "." + dg.substr(dg.size() - frac);
        } else {
            out += "0." + std::string(static_cast<std::size_t>(frac) - dg.size(), '0') + dg;
        }
        return out;
    }
    return std::get<ExpressionValue>(value).text;
}

namespace {

bool all_digits(std::string_view s) {
    if (s.empty()) return false;
    return std::all_of(s.begin(), s.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); });
}

std::optional<long long> to_ll(std::string_view s) {
    if (s.empty()) return std::nullopt;
    bool neg = false;
    std::size_t i = 0;
    if (s[0] == '+' || s[0] == '-') {
        neg = s[0] == '-';
        i = 1;
    }
    if (i == s.size()) return std::nullopt;
    unsigned long long acc = 0;
    const unsigned long long limit = neg ? 9223372036854775808ull : 9223372036854775807ull;
    for (; i < s.size(); ++i) {
        char c = s[i];
        if (!std::isdigit(static_cast<unsigned char>(c))) return std::nullopt;
        acc = acc * 10 + static_cast<unsigned long long>(c - '0');
        if (acc > limit) return std::nullopt;
    }
    if (neg) return -static_cast<long long>(acc);
    return static_cast<long long>(acc);
}

// Finds the end of a balanced {...} group starting at `open` (index of '{').
// Returns npos when unbalanced.
std::size_t match_brace(std::string_view s, std::size_t open) {
    int depth = 0;
    for (std::size_t i = open; i < s.size(); ++i) {
        if (s[i] == '{') ++depth;
        else if (s[i] == '}' && --depth == 0) return i;
    }
    return std::string_view::npos;
}

void replace_all(std::string& s, std::string_view from, std::string_view to) {
    std::size_t pos = 0;
    while ((pos = s.find(from, pos)) != std::string::npos) {
        s.replace(pos, from.size(), to);
        pos += to.size();
    }
}

// Strips LaTeX/markup wrappers that carry no value: $ signs, an outer
// \boxed{...}, \text{...} groups, escaped percent, \frac aliases.
std::string strip_wrappers(std::string_view raw) {
    std::string s(raw);
    s.erase(std::remove(s.begin(), s.end(), '$'), s.end());
    replace_all(s, "\\dfrac", "\\frac");
    replace_all(s, "\\tfrac", "\\frac");
    replace_all(s, "\\%", "%");
    replace_all(s, "\\!", "");

    for (;;) {
        std::string t(trim(s));
        // outer \boxed{...} spanning the whole remainder
        if (t.rfind("\\boxed{", 0) == 0) {
            std::size_t close = match_brace(t, 6);
            if (close == t.size() - 1) {
                s = t.substr(7, close - 7);
                continue;
            }
        }
        // inline \text{...} groups
        std::size_t tp = t.find("\\text{");
        if (tp != std::string::npos) {
            std::size_t close = match_brace(t, tp + 5);
            if (close != std::string::npos) {
                s = t.substr(0, tp) + t.substr(tp + 6, close - tp - 6) + t.substr(close + 1);
                continue;
            }
        }
        return t;
    }
}

CanonicalAnswer make_integer(BigInt v, std::string raw) {
    return CanonicalAnswer{IntegerValue{std::move(v)}, std::move(raw)};
}

std::optional<CanonicalAnswer> make_rational(long long num, long long den, std::string raw) {
    if (den == 0) return std::nullopt;
    if (den < 0) {
        num = -num;
        den = -den;
    }
    long long g = std::gcd(num < 0 ? -num : num, den);
    if (g > 1) {
        num /= g;
        den /= g;
    }
    if (den == 1) return make_integer(BigInt::from_ll(num), std::move(raw));
    return CanonicalAnswer{RationalValue{num, den}, std::move(raw)};
}

// digits: significand without a decimal point; exponent: power of ten.
CanonicalAnswer make_decimal(bool neg, std::string digits, int exponent, std::string raw) {
    std::size_t lead = 0;
    while (lead < digits.size() && digits[lead] == '0') ++lead;
    digits.erase(0, lead);
    while (!digits.empty() && digits.back() == '0' && exponent < 0) {
        digits.pop_back();
        ++exponent;
    }
    if (digits.empty()) return make_integer(BigInt{}, std::move(raw));
    if (exponent >= 0) {
        auto v = BigInt::parse(digits);
        BigInt scaled = v->times_pow10(exponent);
        if (neg) scaled = BigInt{} - scaled;
        return make_integer(std::move(scaled), std::move(raw));
    }
    return CanonicalAnswer{DecimalValue{neg, std::move(digits), exponent}, std::move(raw)};
}

// Parses [+-]?(\d+ | \d+.\d* | .\d+) into Integer/Decimal. nullopt otherwise.
std::optional<CanonicalAnswer> parse_plain_number(std::string_view s, const std::string& raw) {
    if (s.empty()) return std::nullopt;
    bool neg = false;
    if (s[0] == '+' || s[0] == '-') {
        neg = s[0] == '-';
        s.remove_prefix(1);
    }
    std::size_t dot = s.find('.');
    if (dot == std::string_view::npos) {
        if (!all_digits(s)) return std::nullopt;
        auto v = BigInt::parse(s);
        BigInt b = *v;
        if (neg) b = BigInt{} - b;
        return make_integer(std::move(b), raw);
    }
    std::string_view ip = s.substr(0, dot);
    std::string_view fp = s.substr(dot + 1);
    if (ip.empty() && fp.empty()) return std::nullopt;
    if (!ip.empty() && !all_digits(ip)) return std::nullopt;
    if (!fp.empty() && !all_digits(fp)) return std::nullopt;
    std::string digits = std::string(ip) + std::string(fp);
    return make_decimal(neg, std::move(digits), -static_cast<int>(fp.size()), raw);
}

// "1,234,567" with strict 3-digit grouping -> "1234567"; nullopt otherwise.
std::optional<std::string> strip_thousands_commas(std::string_view s) {
    if (s.find(',') == std::string_view::npos) return std::nullopt;
    std::string out;
    std::size_t i = 0;
    if (i < s.size() && (s[i] == '+' || s[i] == '-')) out.push_back(s[i++]);
    std::size_t head = 0;
    while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) {
        out.push_back(s[i++]);
        ++head;
    }
    if (head == 0 || head > 3) return std::nullopt;
    bool saw_group = false;
    while (i < s.size() && s[i] == ',') {
        ++i;
        for (int k = 0; k < 3; ++k) {
            if (i >= s.size() || !std::isdigit(static_cast<unsigned char>(s[i]))) return std::nullopt;
            out.push_back(s[i++]);
        }
        saw_group = true;
    }
    if (!saw_group) return std::nullopt;
    // optional fraction part
    if (i < s.size()) {
        if (s[i] != '.') return std::nullopt;
        out.push_back(s[i++]);
        if (i >= s.size()) return std::nullopt;
        while (i < s.size()) {
            if (!std::isdigit(static_cast<unsigned char>(s[i]))) return std::nullopt;
            out.push_back(s[i++]);
        }
    }
    return out;
}

// \frac{a}{b} with integer a, b; optional leading sign.
std::optional<CanonicalAnswer> parse_latex_frac(std::string_view s, const std::string& raw) {
    bool neg = false;
    if (!s.empty() && (s[0] == '-' || s[0] == '+')) {
        neg = s[0] == '-';
        s.remove_prefix(1);
    }
    if (s.rfind("\\frac{", 0) != 0) return std::nullopt;
    std::size_t close_a = match_brace(s, 5);
    if (close_a == std::string_view::npos || close_a + 1 >= s.size() || s[close_a + 1] != '{') return std::nullopt;
    std::size_t close_b = match_brace(s, close_a + 1);
    if (close_b != s.size() - 1) return std::nullopt;
    auto a = to_ll(trim(s.substr(6, close_a - 6)));
    auto b = to_ll(trim(s.substr(close_a + 2, close_b - close_a - 2)));
    if (!a || !b) return std::nullopt;
    return make_rational(neg ? -*a : *a, *b, raw);
}

std::optional<CanonicalAnswer> parse_slash_fraction(std::string_view s, const std::string& raw) {
    std::size_t slash = s.find('/');
    if (slash == std::string_view::npos || slash == 0 || slash == s.size() - 1) return std::nullopt;
    auto a = to_ll(s.substr(0, slash));
    auto b = to_ll(s.substr(slash + 1));
    if (!a || !b) return std::nullopt;
    return make_rational(*a, *b, raw);
}

std::optional<CanonicalAnswer> parse_numeric(std::string_view s, const std::string& raw);

// p% -> p/100 as a reduced rational (integer when it reduces fully).
std::optional<CanonicalAnswer> parse_percent(std::string_view s, const std::string& raw) {
    if (s.empty() || s.back() != '%') return std::nullopt;
    std::string_view inner = trim(s.substr(0, s.size() - 1));
    auto num = parse_numeric(inner, raw);
    if (!num) return std::nullopt;
    if (const auto* i = std::get_if<IntegerValue>(&num->value)) {
        auto v = to_ll(i->value.str());
        if (!v) return std::nullopt;
        return make_rational(*v, 100, raw);
    }
    if (const auto* d = std::get_if<DecimalValue>(&num->value)) {
        auto v = to_ll(d->digits);
        if (!v) return std::nullopt;
        int k = -d->exponent;
        if (k > 15) return std::nullopt;
        long long den = 100;
        for (int j = 0; j < k; ++j) den *= 10;
        return make_rational(d->negative ? -*v : *v, den, raw);
    }
    if (const auto* r = std::get_if<RationalValue>(&num->value)) {
        if (r->num > 92233720368547758LL || r->num < -92233720368547758LL) return std::nullopt;
        if (r->den > 92233720368547758LL) return std::nullopt;
        return make_rational(r->num, r->den * 100, raw);
    }
    return std::nullopt;
}

std::optional<CanonicalAnswer> parse_numeric(std::string_view s, const std::string& raw) {
    if (s.empty()) return std::nullopt;
    if (auto pct = parse_percent(s, raw)) return pct;
    std::string dechunked;
    if (auto stripped = strip_thousands_commas(s)) {
        dechunked = *stripped;
        s = dechunked;
    }
    if (auto frac = parse_latex_frac(s, raw)) return frac;
    if (auto frac = parse_slash_fraction(s, raw)) return frac;
    return parse_plain_number(s, raw);
}

}  // namespace

std::optional<CanonicalAnswer> try_normalize(std::string_view raw) {
    std::string body = strip_wrappers(raw);
    if (body.empty()) return std::nullopt;
    if (body[0] == '+' && body.size() > 1) body.erase(0, 1);
    if (auto num = parse_numeric(body, std::string(raw))) return num;
    std::string expr = collapse_whitespace(body);
    if (expr.empty()) return std::nullopt;
    return CanonicalAnswer{ExpressionValue{std::move(expr)}, std::string(raw)};
}

CanonicalAnswer normalize(std::string_view raw) {
    auto a = try_normalize(raw);
    if (!a) throw EmptyAfterNormalization(std::string(raw));
    return *a;
}

namespace {

// Exact value as num/den with den > 0.
struct Fraction {
    BigInt num;
    BigInt den;
};

Fraction to_fraction(const CanonicalAnswer& a) {
    if (const auto* i = std::get_if<IntegerValue>(&a.value)) return {i->value, BigInt::from_ll(1)};
    if (const auto* r = std::get_if<RationalValue>(&a.value))
        return {BigInt::from_ll(r->num), BigInt::from_ll(r->den)};
    const auto& d = std::get<DecimalValue>(a.value);
    BigInt num = *BigInt::parse(d.digits);
    if (d.negative) num = BigInt{} - num;
    if (d.exponent >= 0) return {num.times_pow10(d.exponent), BigInt::from_ll(1)};
    return {std::move(num), BigInt::pow10(-d.exponent)};
}

}  // namespace

bool answers_equivalent(const CanonicalAnswer& a, const CanonicalAnswer& b) {
    bool a_num = a.is_numeric();
    bool b_num = b.is_numeric();
    if (a_num != b_num) return false;
    if (!a_num) {
        return std::get<ExpressionValue>(a.value).text == std::get<ExpressionValue>(b.value).text;
    }
    Fraction fa = to_fraction(a);
    Fraction fb = to_fraction(b);
    BigInt lhs = fa.num * fb.den;
    BigInt rhs = fb.num * fa.den;
    if (lhs == rhs) return true;
    if (a.kind() != AnswerKind::Decimal && b.kind() != AnswerKind::Decimal) return false;
    // |x - y| <= 1e-6 * max(|x|, |y|), scaled by the common denominator.
    BigInt diff = (lhs - rhs).abs_value();
    BigInt bound = std::max(lhs.abs_value(), rhs.abs_value(),
                            [](const BigInt& x, const BigInt& y) { return compare(x, y) < 0; });
    return compare(diff.times_pow10(6), bound) <= 0;
}

}  // namespace mathforge
