#include "holocyc/rigor.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace holocyc {

using json = nlohmann::json;

namespace {

Integer two_pow(int bits) { return Integer(1) << bits; }

Rational dyadic_down(const Rational& q, int bits)
{
    Integer s = two_pow(bits);
    return Rational(floor(q * s), s);
}

Rational dyadic_up(const Rational& q, int bits)
{
    Integer s = two_pow(bits);
    return Rational(ceil(q * s), s);
}

Enclosure outward(const Rational& centre, const Rational& radius, int bits)
{
    return {dyadic_down(centre - radius, bits), dyadic_up(centre + radius, bits)};
}

Enclosure sin_cos_series(const Rational& x, bool is_sin, int bits)
{
    const Rational tol(Integer(1), two_pow(bits + 4));
    Rational sum = 0, term = is_sin ? x : Rational(1);
    int j = is_sin ? 1 : 0;
    const Rational x2 = x * x;
    for (;;) {
        sum += term;
        Rational next = -term * x2 / ((j + 1) * (j + 2));
        j += 2;
        // the next nonzero term bounds the Lagrange remainder once terms decrease
        if (j > abs(x) && abs(next) <= tol) return outward(sum, abs(next), bits + 8);
        term = next;
    }
}

Enclosure exp_series(const Rational& x, int bits)
{
    if (x < 0) {
        Enclosure e = exp_series(-x, bits + 2);
        return {dyadic_down(1 / e.hi, bits + 8), dyadic_up(1 / e.lo, bits + 8)};
    }
    const Rational tol(Integer(1), two_pow(bits + 4));
    Integer c = ceil(x);
    Rational growth = 1;   // e^x <= 3^ceil(x)
    for (Integer i = 0; i < c; ++i) growth *= 3;
    Rational sum = 0, term = 1;
    for (int j = 0;; ++j) {
        sum += term;
        Rational next = term * x / (j + 1);
        if (j + 1 > x && next * growth <= tol) return outward(sum, next * growth, bits + 8);
        term = next;
    }
}

// arctan(1/m) for integer m >= 2; alternating series with decreasing terms.
Enclosure arctan_inverse(int m, int bits)
{
    const Rational tol(Integer(1), two_pow(bits + 8));
    Rational sum = 0, power(Integer(1), Integer(m));
    const Rational m2 = Rational(m) * m;
    for (int j = 0;; ++j) {
        Rational term = power / (2 * j + 1);
        if (term <= tol) return outward(sum, term, bits + 10);
        sum += (j % 2 == 0) ? term : Rational(-term);
        power /= m2;
    }
}

Rational factorial(int n)
{
    Rational f = 1;
    for (int i = 2; i <= n; ++i) f *= i;
    return f;
}

Rational rpow(const Rational& x, int n)
{
    Rational r = 1;
    for (int i = 0; i < n; ++i) r *= x;
    return r;
}

RationalPoly poly_rem(RationalPoly a, const RationalPoly& b)
{
    const int db = b.degree();
    const Rational& lead = b.coeffs.back();
    while (!a.is_zero() && a.degree() >= db) {
        Rational f = a.coeffs.back() / lead;
        int shift = a.degree() - db;
        for (int i = 0; i <= db; ++i) a.coeffs[shift + i] -= f * b.coeffs[i];
        a.coeffs.pop_back();
        while (!a.coeffs.empty() && a.coeffs.back() == 0) a.coeffs.pop_back();
    }
    return a;
}

int sign_changes(const std::vector<RationalPoly>& seq, const Rational& x)
{
    int changes = 0, prev = 0;
    for (const auto& p : seq) {
        Rational v = p(x);
        int s = v > 0 ? 1 : v < 0 ? -1 : 0;
        if (s == 0) continue;
        if (prev != 0 && s != prev) ++changes;
        prev = s;
    }
    return changes;
}

int sign_of(const Rational& q) { return q > 0 ? 1 : q < 0 ? -1 : 0; }

} // namespace

Enclosure::Enclosure(const Rational& l, const Rational& h) : lo(l), hi(h)
{
    if (lo > hi) throw std::invalid_argument("enclosure with lo > hi");
}

Rational Enclosure::mag() const { return std::max(abs(lo), abs(hi)); }

Enclosure operator+(const Enclosure& a, const Enclosure& b) { return {a.lo + b.lo, a.hi + b.hi}; }
Enclosure operator-(const Enclosure& a, const Enclosure& b) { return {a.lo - b.hi, a.hi - b.lo}; }
Enclosure operator-(const Enclosure& a) { return {-a.hi, -a.lo}; }

Enclosure operator*(const Enclosure& a, const Enclosure& b)
{
    std::array<Rational, 4> p{a.lo * b.lo, a.lo * b.hi, a.hi * b.lo, a.hi * b.hi};
    return {*std::min_element(p.begin(), p.end()), *std::max_element(p.begin(), p.end())};
}

Enclosure operator*(const Rational& s, const Enclosure& a)
{
    return s >= 0 ? Enclosure(s * a.lo, s * a.hi) : Enclosure(s * a.hi, s * a.lo);
}

Enclosure enclose(Elementary fn, const Rational& x, int bits)
{
    if (bits < 16) throw std::invalid_argument("precision_bits must be at least 16");
    if (x == 0) return fn == Elementary::sin ? Enclosure(Rational(0)) : Enclosure(Rational(1));
    switch (fn) {
    case Elementary::sin: return sin_cos_series(x, true, bits);
    case Elementary::cos: return sin_cos_series(x, false, bits);
    case Elementary::exp: return exp_series(x, bits);
    }
    throw std::logic_error("unknown function");
}

Enclosure enclose(Elementary fn, const Enclosure& x, int bits)
{
    if (x.lo == x.hi) return enclose(fn, x.lo, bits);
    if (fn == Elementary::exp) return {enclose(fn, x.lo, bits).lo, enclose(fn, x.hi, bits).hi};
    // sin and cos are 1-Lipschitz
    Enclosure c = enclose(fn, x.mid(), bits);
    Rational r = x.width() / 2;
    return {c.lo - r, c.hi + r};
}

Enclosure pi_enclosure(int bits)
{
    // Machin: pi = 16 arctan(1/5) - 4 arctan(1/239)
    Enclosure p = Rational(16) * arctan_inverse(5, bits + 6) - Rational(4) * arctan_inverse(239, bits + 6);
    return {dyadic_down(p.lo, bits + 4), dyadic_up(p.hi, bits + 4)};
}

TaylorBound taylor_bound(const TrigExpFace& f, int n, int bits)
{
    if (f.alpha == 0 || f.beta <= 0) throw std::invalid_argument("face needs alpha != 0 and beta > 0");
    if (f.x_lo < 0 || f.x_lo >= f.x_hi) throw std::invalid_argument("face domain must satisfy 0 <= x_lo < x_hi");
    TaylorBound tb;
    for (int j = 0; j <= n; ++j) {
        Enclosure trig = j % 4 == 0 ? f.A : j % 4 == 1 ? f.B : j % 4 == 2 ? -f.A : -f.B;
        Enclosure ex = j % 2 == 0 ? f.C + f.D : f.C - f.D;
        Enclosure aj = rpow(f.alpha, j) * trig + rpow(f.beta, j) * ex;
        tb.coeffs.push_back((1 / factorial(j)) * aj);
    }
    Rational growth = enclose(Elementary::exp, f.beta * f.x_hi, bits).hi;
    tb.m_bar = (rpow(abs(f.alpha), n + 1) * (f.A.mag() + f.B.mag()) +
                rpow(f.beta, n + 1) * (f.C.mag() * growth + f.D.mag())) /
               factorial(n + 1);
    return tb;
}

RationalPoly::RationalPoly(std::vector<Rational> c) : coeffs(std::move(c))
{
    while (!coeffs.empty() && coeffs.back() == 0) coeffs.pop_back();
}

Rational RationalPoly::operator()(const Rational& x) const
{
    Rational v = 0;
    for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it) v = v * x + *it;
    return v;
}

RationalPoly RationalPoly::derivative() const
{
    std::vector<Rational> d;
    for (size_t k = 1; k < coeffs.size(); ++k) d.push_back(coeffs[k] * static_cast<int>(k));
    return RationalPoly(std::move(d));
}

std::vector<std::string> RationalPoly::to_strings() const
{
    std::vector<std::string> out;
    for (const auto& c : coeffs) out.push_back(to_string(c));
    return out;
}

Truncation rational_majorant(const std::vector<Enclosure>& a, const Rational& M, int n, int k, Bound side)
{
    if (static_cast<int>(a.size()) != n + 1) throw std::invalid_argument("need n + 1 coefficient enclosures");
    const Rational scale = pow10(k), unit = pow10(-k);
    Truncation t;
    std::vector<Rational> c;
    for (const auto& e : a) {
        Integer tl = trunc(e.lo * scale), th = trunc(e.hi * scale);
        if (tl != th) t.digits_determined = false;
        c.push_back(side == Bound::upper ? Rational(th) * unit + unit : Rational(tl) * unit - unit);
    }
    c.push_back(side == Bound::upper ? M : Rational(-M));
    t.poly = RationalPoly(std::move(c));
    return t;
}

std::vector<RationalPoly> sturm_sequence(const RationalPoly& p)
{
    if (p.is_zero()) throw std::invalid_argument("Sturm sequence of the zero polynomial");
    std::vector<RationalPoly> seq{p};
    RationalPoly d = p.derivative();
    if (d.is_zero()) return seq;
    seq.push_back(d);
    for (;;) {
        RationalPoly r = poly_rem(seq[seq.size() - 2], seq.back());
        if (r.is_zero()) break;
        // rescale by a positive constant to keep the sizes down
        Rational lead = abs(r.coeffs.back());
        for (auto& c : r.coeffs) c = -c / lead;
        seq.push_back(std::move(r));
    }
    return seq;
}

int sturm_count(const RationalPoly& p, const Rational& lo, const Rational& hi)
{
    if (!(lo < hi)) throw std::invalid_argument("sturm_count needs lo < hi");
    if (p(lo) == 0 || p(hi) == 0) throw std::invalid_argument("polynomial vanishes at an endpoint; perturb it");
    auto seq = sturm_sequence(p);
    return sign_changes(seq, lo) - sign_changes(seq, hi);
}

Rational choose_M(const Rational& m_bar)
{
    if (m_bar <= 0) return Rational(0);
    if (m_bar >= 1) return Rational(ceil(m_bar));
    Integer q = floor(1 / m_bar);
    if (q <= 1000000) return Rational(Integer(1), q);
    int j = 0;
    Rational scaled = m_bar;
    while (scaled < 1) {
        scaled *= 10;
        ++j;
    }
    return Rational(ceil(scaled * 100)) / 100 * pow10(-j);
}

SignCertificate certify_sign(const TrigExpFace& face, Sign expected, int n, int k, const Rational& M, int bits)
{
    SignCertificate c;
    c.n = n;
    c.k = k;
    c.precision_bits = bits;
    c.M = M;
    TaylorBound tb = taylor_bound(face, n, bits);
    c.m_bar = tb.m_bar;
    Truncation t = rational_majorant(tb.coeffs, M, n, k, expected == Sign::negative ? Bound::upper : Bound::lower);
    c.poly = t.poly;
    c.digits_determined = t.digits_determined;
    c.x_lo = face.x_lo;
    c.x_hi = face.x_hi;
    c.probe = (face.x_lo + face.x_hi) / 2;
    c.at_lo = c.poly(c.x_lo);
    c.at_probe = c.poly(c.probe);
    c.at_hi = c.poly(c.x_hi);
    auto seq = sturm_sequence(c.poly);
    c.sturm_length = static_cast<int>(seq.size());

    const int want = expected == Sign::negative ? -1 : 1;
    if (M < c.m_bar) {
        c.reason = "M is below the remainder bound";
        return c;
    }
    if (sign_of(c.at_lo) != want || sign_of(c.at_probe) != want || sign_of(c.at_hi) != want) {
        c.reason = "bounding polynomial has the wrong sign at a sample point";
        if (c.at_lo != 0 && c.at_hi != 0) c.sturm_roots = sign_changes(seq, c.x_lo) - sign_changes(seq, c.x_hi);
        return c;
    }
    c.sturm_roots = sign_changes(seq, c.x_lo) - sign_changes(seq, c.x_hi);
    if (c.sturm_roots != 0) {
        c.reason = "bounding polynomial has roots in the face";
        return c;
    }
    c.certified = true;
    return c;
}

CrossingEquations crossing_equations(const PiecewiseSystem& s)
{
    if (!s.has_exact()) throw std::invalid_argument("crossing equations need exact coefficients");
    auto side = [](const HoloPoly& p, const char* name) {
        const auto& e = *p.exact;
        if (e.size() != 2) throw std::invalid_argument(std::string(name) + " side is not linear");
        if (e[1].second != 1) throw std::invalid_argument(std::string(name) + " linear part is not i + lambda");
        if (e[1].first == 0) throw std::invalid_argument(std::string(name) + " side has lambda = 0");
        // focus -b / (lambda + i)
        const Rational& l = e[1].first;
        const Rational &br = e[0].first, &bi = e[0].second;
        Rational den = l * l + 1;
        Rational x = -(br * l + bi) / den;
        Rational y = -(bi * l - br) / den;
        return std::array<Rational, 3>{l, x, y};
    };
    auto up = side(s.upper, "upper");
    auto lo = side(s.lower, "lower");
    CrossingEquations eq;
    eq.lambda_plus = up[0];
    eq.xq = up[1];
    eq.yq = up[2];
    eq.lambda_minus = lo[0];
    eq.xp = lo[1];
    eq.yp = lo[2];
    Integer K = 1;
    for (const Rational& q : {eq.yq, Rational(eq.xp - eq.xq), eq.yp}) K = boost::multiprecision::lcm(K, denominator(q));
    eq.K = K;
    return eq;
}

TrigExpFace CrossingEquations::face_fixed_u(int which, const Rational& u, const Rational& v_lo, const Rational& v_hi,
                                            int bits) const
{
    Enclosure S = enclose(Elementary::sin, u, bits), Cu = enclose(Elementary::cos, u, bits);
    if (S.contains_zero()) throw std::domain_error("sin u vanishes on the face; the elimination of x is degenerate");
    Enclosure Em = enclose(Elementary::exp, Rational(lambda_minus * u), bits);
    Enclosure Ep = enclose(Elementary::exp, Rational(-lambda_minus * u), bits);
    Enclosure a = Rational(-K * yq) * S;
    Enclosure b = Rational(K * (xp - xq)) * S + Rational(K * yp) * (Em - Cu);
    TrigExpFace f;
    Enclosure ex;
    if (which == 1) {
        f.A = a;
        f.B = b;
        ex = -a;
    } else if (which == 2) {
        f.A = -b;
        f.B = a;
        ex = Rational(K * (xp - xq)) * S + Rational(K * yp) * (Cu - Ep);
    } else {
        throw std::invalid_argument("function index must be 1 or 2");
    }
    f.alpha = 1;
    f.beta = abs(lambda_plus);
    if (lambda_plus > 0) {
        f.D = ex;
        f.C = Enclosure(Rational(0));
    } else {
        f.C = ex;
        f.D = Enclosure(Rational(0));
    }
    f.x_lo = v_lo;
    f.x_hi = v_hi;
    return f;
}

TrigExpFace CrossingEquations::face_fixed_v(int which, const Rational& v, const Rational& u_lo, const Rational& u_hi,
                                            int bits) const
{
    Enclosure Sv = enclose(Elementary::sin, v, bits), Cv = enclose(Elementary::cos, v, bits);
    Enclosure Ev = enclose(Elementary::exp, Rational(-lambda_plus * v), bits);
    const Rational Kd = K * (xp - xq), Ky = K * yq, Kp = K * yp;
    Enclosure sin_c, cos_c, em, ep;   // coefficients of sin u, cos u, e^{lambda^- u}, e^{-lambda^- u}
    if (which == 1) {
        sin_c = Rational(-Ky) * Cv + Kd * Sv + Ky * Ev;
        cos_c = Rational(-Kp) * Sv;
        em = Kp * Sv;
        ep = Enclosure(Rational(0));
    } else if (which == 2) {
        sin_c = Rational(-Kd) * Cv - Ky * Sv + Kd * Ev;
        cos_c = Kp * Cv + Kp * Ev;
        em = Rational(-Kp) * Cv;
        ep = Rational(-Kp) * Ev;
    } else {
        throw std::invalid_argument("function index must be 1 or 2");
    }
    TrigExpFace f;
    f.A = cos_c;
    f.B = sin_c;
    f.alpha = 1;
    f.beta = abs(lambda_minus);
    if (lambda_minus < 0) {
        f.D = em;
        f.C = ep;
    } else {
        f.C = em;
        f.D = ep;
    }
    f.x_lo = u_lo;
    f.x_hi = u_hi;
    return f;
}

std::array<long double, 2> CrossingEquations::eval(long double u, long double v) const
{
    auto ld = [](const Rational& q) { return q.convert_to<long double>(); };
    const long double k = ld(K), dx = ld(xp - xq), yP = ld(yp), yQ = ld(yq), lp = ld(lambda_plus), lm = ld(lambda_minus);
    long double S = std::sin(u), C = std::cos(u);
    long double a = -k * yQ * S;
    long double b = k * (dx * S + yP * (std::exp(lm * u) - C));
    long double f = k * (dx * S + yP * (C - std::exp(-lm * u)));
    long double cv = std::cos(v), sv = std::sin(v), ev = std::exp(-lp * v);
    return {a * cv + b * sv - a * ev, -b * cv + a * sv + f * ev};
}

std::array<long double, 4> CrossingEquations::jacobian(long double u, long double v) const
{
    auto ld = [](const Rational& q) { return q.convert_to<long double>(); };
    const long double k = ld(K), dx = ld(xp - xq), yP = ld(yp), yQ = ld(yq), lp = ld(lambda_plus), lm = ld(lambda_minus);
    long double S = std::sin(u), C = std::cos(u), em = std::exp(lm * u), ep = std::exp(-lm * u);
    long double a = -k * yQ * S, da = -k * yQ * C;
    long double b = k * (dx * S + yP * (em - C)), db = k * (dx * C + yP * (lm * em + S));
    long double f = k * (dx * S + yP * (C - ep)), df = k * (dx * C + yP * (-S + lm * ep));
    long double cv = std::cos(v), sv = std::sin(v), ev = std::exp(-lp * v);
    return {da * cv + db * sv - da * ev, -a * sv + b * cv + lp * a * ev,
            -db * cv + da * sv + df * ev, b * sv + a * cv - lp * f * ev};
}

long double CrossingEquations::section_point(long double u) const
{
    const long double x = xp.convert_to<long double>(), y = yp.convert_to<long double>();
    const long double lm = lambda_minus.convert_to<long double>();
    return x + y * (std::exp(lm * u) - std::cos(u)) / std::sin(u);
}

std::string face_name(FaceId f)
{
    switch (f) {
    case FaceId::u_lo: return "u_lo";
    case FaceId::u_hi: return "u_hi";
    case FaceId::v_lo: return "v_lo";
    case FaceId::v_hi: return "v_hi";
    }
    return "?";
}

namespace {

constexpr std::array<FaceId, 4> all_faces{FaceId::u_lo, FaceId::u_hi, FaceId::v_lo, FaceId::v_hi};

TrigExpFace build_face(const CrossingEquations& eq, const Box& box, FaceId id, int which, int bits)
{
    switch (id) {
    case FaceId::u_lo: return eq.face_fixed_u(which, box.u_lo, box.v_lo, box.v_hi, bits);
    case FaceId::u_hi: return eq.face_fixed_u(which, box.u_hi, box.v_lo, box.v_hi, bits);
    case FaceId::v_lo: return eq.face_fixed_v(which, box.v_lo, box.u_lo, box.u_hi, bits);
    case FaceId::v_hi: return eq.face_fixed_v(which, box.v_hi, box.u_lo, box.u_hi, bits);
    }
    throw std::logic_error("unknown face");
}

// One attempt at fixed (n, k); precision grows until the truncated digits are
// determined so that the coefficients follow the rounding rule exactly.
SignCertificate attempt(const CrossingEquations& eq, const Box& box, FaceId id, const FaceParams& p, int n, int k,
                        const std::optional<Rational>& M, int bits)
{
    for (;;) {
        TrigExpFace f = build_face(eq, box, id, p.function, bits);
        Rational m = M ? *M : choose_M(taylor_bound(f, n, bits).m_bar);
        SignCertificate c = certify_sign(f, p.expected, n, k, m, bits);
        if (c.digits_determined || bits >= 1024) return c;
        bits *= 2;
    }
}

bool pattern_ok(const std::array<FaceParams, 4>& p)
{
    return p[0].function == p[1].function && p[2].function == p[3].function && p[0].function != p[2].function &&
           p[0].expected != p[1].expected && p[2].expected != p[3].expected;
}

void check_box(const Box& b)
{
    if (!(b.u_lo < b.u_hi && b.v_lo < b.v_hi)) throw std::invalid_argument("box bounds are not increasing");
    if (b.u_lo <= 0 || b.v_lo < 0) throw std::invalid_argument("flight times must be positive");
    Enclosure pi = pi_enclosure(64);
    Integer m = ceil(b.u_lo / pi.hi);
    if (Rational(m) * pi.lo <= b.u_hi)
        throw std::domain_error("the u range of the box meets a zero of sin u; the elimination of x is degenerate");
}

json face_json(const FaceResult& r, const Box& box)
{
    const auto& c = r.cert;
    const Rational& fixed = r.face == FaceId::u_lo ? box.u_lo
                            : r.face == FaceId::u_hi ? box.u_hi
                            : r.face == FaceId::v_lo ? box.v_lo
                                                     : box.v_hi;
    json j;
    j["face"] = face_name(r.face);
    j["fixed"] = to_string(fixed);
    j["function"] = r.function == 1 ? "e1" : "e2";
    j["sign"] = r.expected == Sign::negative ? "negative" : "positive";
    j["polynomial"] = r.expected == Sign::negative ? "majorant" : "minorant";
    j["n"] = c.n;
    j["k"] = c.k;
    j["M"] = to_string(c.M);
    j["m_bar"] = to_string(c.m_bar);
    j["precision_bits"] = c.precision_bits;
    j["coefficients"] = c.poly.to_strings();
    j["digits_determined"] = c.digits_determined;
    j["domain"] = {to_string(c.x_lo), to_string(c.x_hi)};
    j["probe"] = to_string(c.probe);
    j["values"] = {{"lo", to_string(c.at_lo)}, {"probe", to_string(c.at_probe)}, {"hi", to_string(c.at_hi)}};
    j["sturm_length"] = c.sturm_length;
    j["sturm_roots"] = c.sturm_roots;
    j["certified"] = c.certified;
    j["reason"] = c.reason;
    j["escalated"] = r.escalated;
    j["note"] = r.note;
    return j;
}

} // namespace

MirandaCertificate miranda_verify(const CrossingEquations& eq, const Box& box, const std::array<FaceParams, 4>& params,
                                  int bits, bool escalate)
{
    check_box(box);
    MirandaCertificate mc;
    mc.box = box;
    for (int i = 0; i < 4; ++i) {
        const FaceParams& p = params[i];
        FaceResult r{all_faces[i], p.function, p.expected, {}, false, ""};
        r.cert = attempt(eq, box, all_faces[i], p, p.n, p.k, p.M, bits);
        if (!r.cert.certified && escalate) {
            std::string given = "given (n, k, M) = (" + std::to_string(p.n) + ", " + std::to_string(p.k) + ", " +
                                to_string(r.cert.M) + ") failed: " + r.cert.reason;
            for (int b = bits; b <= 4 * bits && !r.cert.certified; b *= 2) {
                // the truncation error grows like 10^{-k} x^n, so k is searched
                // for each degree
                for (int n = p.n; n <= 24 && !r.cert.certified; n += 2) {
                    for (int k = p.k; k <= 20; ++k) {
                        SignCertificate c = attempt(eq, box, all_faces[i], p, n, k, std::nullopt, b);
                        if (c.certified) {
                            r.cert = c;
                            break;
                        }
                    }
                }
            }
            r.escalated = r.cert.certified;
            r.note = given;
        }
        mc.faces.push_back(std::move(r));
    }
    if (!pattern_ok(params)) {
        mc.failure = "face assignment does not match the Poincare-Miranda sign pattern";
        return mc;
    }
    for (const auto& f : mc.faces) {
        if (!f.cert.certified) {
            mc.failure = "face " + face_name(f.face) + ": " + f.cert.reason;
            return mc;
        }
    }
    mc.certified = true;
    return mc;
}

std::array<FaceParams, 4> default_face_params(const CrossingEquations& eq, const Box& box)
{
    auto d = [](const Rational& q) { return q.convert_to<long double>(); };
    long double ul = d(box.u_lo), uh = d(box.u_hi), vl = d(box.v_lo), vh = d(box.v_hi);
    // the sign of component `which` along a face, if it is the same at every sample
    auto face_sign = [&](int which, bool fixed_u, long double at) -> std::optional<Sign> {
        std::optional<Sign> s;
        for (int i = 0; i <= 16; ++i) {
            long double t = i / 16.0L;
            auto e = fixed_u ? eq.eval(at, vl + t * (vh - vl)) : eq.eval(ul + t * (uh - ul), at);
            Sign here = e[which - 1] < 0 ? Sign::negative : Sign::positive;
            if (s && *s != here) return std::nullopt;
            s = here;
        }
        return s;
    };
    for (int first : {1, 2}) {
        int second = 3 - first;
        auto a = face_sign(first, true, ul), b = face_sign(first, true, uh);
        auto c = face_sign(second, false, vl), e = face_sign(second, false, vh);
        if (a && b && c && e && *a != *b && *c != *e) {
            std::array<FaceParams, 4> p;
            p[0] = {first, *a, 8, 6, std::nullopt};
            p[1] = {first, *b, 8, 6, std::nullopt};
            p[2] = {second, *c, 8, 6, std::nullopt};
            p[3] = {second, *e, 8, 6, std::nullopt};
            return p;
        }
    }
    std::array<FaceParams, 4> p;
    p[0] = {1, Sign::negative, 8, 6, std::nullopt};
    p[1] = {1, Sign::positive, 8, 6, std::nullopt};
    p[2] = {2, Sign::positive, 8, 6, std::nullopt};
    p[3] = {2, Sign::negative, 8, 6, std::nullopt};
    return p;
}

std::vector<BoxSpec> parse_boxes(const std::string& text)
{
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw std::invalid_argument(std::string("malformed boxes document: ") + e.what());
    }
    if (!doc.is_array()) throw std::invalid_argument("boxes document must be a list");
    auto rat = [](const json& v) {
        return v.is_string() ? parse_rational(v.get<std::string>()) : parse_rational(v.dump());
    };
    std::vector<BoxSpec> out;
    for (const auto& b : doc) {
        if (!b.contains("u") || !b.contains("v") || b["u"].size() != 2 || b["v"].size() != 2)
            throw std::invalid_argument("box needs \"u\" and \"v\" intervals");
        BoxSpec s{{rat(b["u"][0]), rat(b["u"][1]), rat(b["v"][0]), rat(b["v"][1])}, std::nullopt};
        if (b.contains("faces")) {
            std::array<FaceParams, 4> p;
            for (int i = 0; i < 4; ++i) {
                std::string name = face_name(all_faces[i]);
                if (!b["faces"].contains(name)) throw std::invalid_argument("faces entry lacks " + name);
                const json& f = b["faces"][name];
                std::string fn = f.value("function", "e1");
                if (fn != "e1" && fn != "e2") throw std::invalid_argument("function must be e1 or e2");
                std::string sg = f.value("sign", "negative");
                if (sg != "negative" && sg != "positive") throw std::invalid_argument("sign must be negative or positive");
                p[i].function = fn == "e1" ? 1 : 2;
                p[i].expected = sg == "negative" ? Sign::negative : Sign::positive;
                p[i].n = f.value("n", 8);
                p[i].k = f.value("k", 6);
                if (f.contains("M")) p[i].M = rat(f["M"]);
            }
            s.faces = p;
        }
        out.push_back(s);
    }
    return out;
}

std::string certificate_json(const PiecewiseSystem& s, const std::vector<MirandaCertificate>& certs)
{
    json doc;
    doc["system"] = json::parse(serialize_system(s));
    doc["boxes"] = json::array();
    for (const auto& c : certs) {
        json b;
        b["u"] = {to_string(c.box.u_lo), to_string(c.box.u_hi)};
        b["v"] = {to_string(c.box.v_lo), to_string(c.box.v_hi)};
        b["verdict"] = c.certified ? "certified" : "failed";
        b["failure"] = c.failure;
        b["faces"] = json::array();
        for (const auto& f : c.faces) b["faces"].push_back(face_json(f, c.box));
        doc["boxes"].push_back(b);
    }
    return doc.dump(2);
}

ReverifyResult reverify(const std::string& text)
{
    ReverifyResult res;
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw std::invalid_argument(std::string("malformed certificate: ") + e.what());
    }
    PiecewiseSystem s = parse_system(doc.at("system").dump());
    CrossingEquations eq = crossing_equations(s);
    std::vector<MirandaCertificate> certs;
    for (const auto& b : doc.at("boxes")) {
        MirandaCertificate mc;
        mc.box = {parse_rational(b["u"][0]), parse_rational(b["u"][1]), parse_rational(b["v"][0]),
                  parse_rational(b["v"][1])};
        std::array<FaceParams, 4> params;
        const auto& faces = b.at("faces");
        if (faces.size() != 4) throw std::invalid_argument("certificate box must list four faces");
        for (int i = 0; i < 4; ++i) {
            const auto& f = faces[i];
            FaceParams p;
            p.function = f.at("function") == "e1" ? 1 : 2;
            p.expected = f.at("sign") == "negative" ? Sign::negative : Sign::positive;
            p.n = f.at("n");
            p.k = f.at("k");
            p.M = parse_rational(f.at("M").get<std::string>());
            params[i] = p;
            FaceResult r{all_faces[i], p.function, p.expected, {}, f.value("escalated", false), f.value("note", "")};
            int bits = f.at("precision_bits");
            r.cert = certify_sign(build_face(eq, mc.box, all_faces[i], p.function, bits), p.expected, p.n, p.k, *p.M,
                                  bits);
            if (!r.cert.certified)
                res.mismatches.push_back("face " + face_name(all_faces[i]) + " does not certify: " + r.cert.reason);
            mc.faces.push_back(std::move(r));
        }
        mc.certified = pattern_ok(params) &&
                       std::all_of(mc.faces.begin(), mc.faces.end(), [](const FaceResult& f) { return f.cert.certified; });
        if (!mc.certified) {
            mc.failure = b.value("failure", "");
            if (b.value("verdict", "") == "certified") res.mismatches.push_back("stored verdict does not replay");
        }
        certs.push_back(std::move(mc));
    }
    json regenerated = json::parse(certificate_json(s, certs));
    if (regenerated != doc) res.mismatches.push_back("regenerated certificate differs from the stored one");
    res.ok = res.mismatches.empty();
    return res;
}

NewtonResult damped_newton(const CrossingEquations& eq, const Box& box, int max_iter)
{
    auto d = [](const Rational& q) { return q.convert_to<long double>(); };
    NewtonResult r;
    r.u = (d(box.u_lo) + d(box.u_hi)) / 2;
    r.v = (d(box.v_lo) + d(box.v_hi)) / 2;
    auto norm = [](const std::array<long double, 2>& f) { return std::hypot(f[0], f[1]); };
    auto F = eq.eval(r.u, r.v);
    for (r.iterations = 0; r.iterations < max_iter; ++r.iterations) {
        auto J = eq.jacobian(r.u, r.v);
        long double det = J[0] * J[3] - J[1] * J[2];
        if (det == 0) break;
        long double du = -(J[3] * F[0] - J[1] * F[1]) / det;
        long double dv = -(-J[2] * F[0] + J[0] * F[1]) / det;
        long double t = 1;
        auto trial = eq.eval(r.u + du, r.v + dv);
        while (norm(trial) >= norm(F) && t > 1e-6L) {
            t /= 2;
            trial = eq.eval(r.u + t * du, r.v + t * dv);
        }
        if (norm(trial) >= norm(F)) break;   // no further decrease at working precision
        r.u += t * du;
        r.v += t * dv;
        F = trial;
        if (std::abs(t * du) + std::abs(t * dv) < 1e-17L) break;
    }
    r.residual = norm(F);
    r.converged = r.residual < 1e-12L;
    r.inside = r.u > d(box.u_lo) && r.u < d(box.u_hi) && r.v > d(box.v_lo) && r.v < d(box.v_hi);
    return r;
}

} // namespace holocyc
