#include "holocyc/core.hpp"

#include <Eigen/Dense>
#include <json.hpp>

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace holocyc {

using json = nlohmann::json;

HoloPoly::HoloPoly(std::vector<Complex> c) : coeffs(std::move(c))
{
    while (coeffs.size() > 1 && coeffs.back() == Complex(0.0, 0.0)) coeffs.pop_back();
}

HoloPoly::HoloPoly(std::vector<ExactComplex> c)
{
    while (c.size() > 1 && c.back().first == 0 && c.back().second == 0) c.pop_back();
    for (const auto& [re, im] : c) coeffs.emplace_back(to_double(re), to_double(im));
    exact = std::move(c);
}

bool HoloPoly::is_zero() const
{
    for (const auto& c : coeffs)
        if (c != Complex(0.0, 0.0)) return false;
    return true;
}

Complex HoloPoly::operator()(Complex z) const { return eval_poly(*this, z); }

Complex HoloPoly::coeff(int k) const
{
    return k >= 0 && k < static_cast<int>(coeffs.size()) ? coeffs[k] : Complex(0.0, 0.0);
}

Complex eval_poly(const HoloPoly& p, Complex z)
{
    Complex acc(0.0, 0.0);
    for (auto it = p.coeffs.rbegin(); it != p.coeffs.rend(); ++it) acc = acc * z + *it;
    return acc;
}

namespace {

Rational number_from_json(const json& v)
{
    if (v.is_string()) return parse_rational(v.get<std::string>());
    if (v.is_number_integer()) return Rational(v.get<long long>());
    if (v.is_number()) {
        double d = v.get<double>();
        if (!std::isfinite(d)) throw std::invalid_argument("non-finite coefficient");
        std::ostringstream os;
        os.precision(17);
        os << d;
        return parse_rational(os.str());
    }
    throw std::invalid_argument("coefficient must be a string or a number");
}

HoloPoly side_from_json(const json& arr, const char* name)
{
    if (!arr.is_array() || arr.empty())
        throw std::invalid_argument(std::string("missing or empty coefficient list: ") + name);
    std::vector<ExactComplex> c;
    for (const auto& entry : arr) {
        if (entry.is_array() && entry.size() == 2)
            c.emplace_back(number_from_json(entry[0]), number_from_json(entry[1]));
        else if (entry.is_string() || entry.is_number())
            c.emplace_back(number_from_json(entry), Rational(0));
        else
            throw std::invalid_argument(std::string("bad coefficient entry in ") + name);
    }
    HoloPoly p(std::move(c));
    if (p.is_zero()) throw std::invalid_argument(std::string("identically zero side: ") + name);
    return p;
}

json side_to_json(const HoloPoly& p)
{
    json arr = json::array();
    if (p.exact) {
        for (const auto& [re, im] : *p.exact) arr.push_back({to_string(re), to_string(im)});
        return arr;
    }
    for (const auto& c : p.coeffs) {
        std::ostringstream re, im;
        re.precision(17);
        im.precision(17);
        re << c.real();
        im << c.imag();
        arr.push_back({re.str(), im.str()});
    }
    return arr;
}

} // namespace

PiecewiseSystem parse_system(const std::string& text)
{
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw std::invalid_argument(std::string("malformed system document: ") + e.what());
    }
    if (!doc.is_object() || !doc.contains("upper") || !doc.contains("lower"))
        throw std::invalid_argument("system document needs \"upper\" and \"lower\"");
    return {side_from_json(doc["upper"], "upper"), side_from_json(doc["lower"], "lower")};
}

PiecewiseSystem load_system(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_system(ss.str());
}

std::string serialize_system(const PiecewiseSystem& s)
{
    json doc;
    doc["upper"] = side_to_json(s.upper);
    doc["lower"] = side_to_json(s.lower);
    return doc.dump();
}

std::vector<Equilibrium> equilibria(const HoloPoly& p, double tol)
{
    if (p.is_zero()) throw std::invalid_argument("equilibria of the zero polynomial");
    std::vector<Equilibrium> out;
    int n = p.degree();
    if (n < 1) return out;

    std::vector<Complex> roots;
    if (n == 1) {
        roots.push_back(-p.coeffs[0] / p.coeffs[1]);
    } else {
        Eigen::MatrixXcd comp = Eigen::MatrixXcd::Zero(n, n);
        Complex lead = p.coeffs[n];
        for (int i = 1; i < n; ++i) comp(i, i - 1) = 1.0;
        for (int i = 0; i < n; ++i) comp(i, n - 1) = -p.coeffs[i] / lead;
        Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(comp, false);
        for (int i = 0; i < n; ++i) roots.push_back(es.eigenvalues()[i]);
    }

    for (Complex z : roots) {
        Complex dp(0.0, 0.0);
        for (int k = n; k >= 1; --k) dp = dp * z + double(k) * p.coeffs[k];
        if (std::abs(dp) > 0.0) {
            Complex step = eval_poly(p, z) / dp;
            Complex polished = z - step;
            if (std::abs(eval_poly(p, polished)) <= std::abs(eval_poly(p, z))) z = polished;
        }
        double res = std::abs(eval_poly(p, z));
        double scale = std::max(1.0, std::abs(z));
        EqSide side = std::abs(z.imag()) <= 1e-12 * scale ? EqSide::boundary
                      : z.imag() > 0                      ? EqSide::upper
                                                          : EqSide::lower;
        out.push_back({z, side, res, res <= tol});
    }
    return out;
}

namespace {

HoloPoly invert_side(const HoloPoly& p)
{
    if (p.degree() > 2) throw std::invalid_argument("inversion needs sides of degree <= 2");
    // F = c0 + c1 z + c2 z^2  ->  -c2 - c1 w - c0 w^2
    if (p.exact) {
        std::vector<ExactComplex> c = *p.exact;
        c.resize(3, {Rational(0), Rational(0)});
        std::vector<ExactComplex> img = {{-c[2].first, -c[2].second},
                                         {-c[1].first, -c[1].second},
                                         {-c[0].first, -c[0].second}};
        return HoloPoly(std::move(img));
    }
    return HoloPoly(std::vector<Complex>{-p.coeff(2), -p.coeff(1), -p.coeff(0)});
}

} // namespace

PiecewiseSystem invert_at_infinity(const PiecewiseSystem& s)
{
    return {invert_side(s.lower), invert_side(s.upper)};
}

} // namespace holocyc
