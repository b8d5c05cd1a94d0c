#include "padicverify/json_io.hpp"

#include <cmath>
#include <stdexcept>

namespace padicverify {

using namespace padic;

PAdicScalar parse_digit_string(const std::string& s, int p, Window w) {
    const auto colon = s.find(':');
    if (colon == std::string::npos) throw std::invalid_argument("digit string needs 'lo:' prefix: " + s);
    const int lo = std::stoi(s.substr(0, colon));
    std::vector<int> digits;
    const std::string body = s.substr(colon + 1);
    if (p <= 36) {
        for (char c : body) {
            int d;
            if (c >= '0' && c <= '9') d = c - '0';
            else if (c >= 'a' && c <= 'z') d = c - 'a' + 10;
            else throw std::invalid_argument("bad digit in " + s);
            digits.push_back(d);
        }
    } else if (!body.empty()) {
        std::size_t pos = 0;
        while (pos <= body.size()) {
            const auto dot = body.find('.', pos);
            digits.push_back(std::stoi(body.substr(pos, dot - pos)));
            if (dot == std::string::npos) break;
            pos = dot + 1;
        }
    }
    for (int d : digits)
        if (d < 0 || d >= p) throw std::invalid_argument("digit out of range in " + s);
    Window win = w;
    win.lo = std::min(win.lo, lo);
    win.hi = std::max(win.hi, lo + static_cast<int>(digits.size()) - 1);
    std::vector<int> full(static_cast<std::size_t>(win.width()), 0);
    for (std::size_t k = 0; k < digits.size(); ++k) full[static_cast<std::size_t>(lo - win.lo) + k] = digits[k];
    return PAdicScalar::from_digits(p, win, std::move(full));
}

json function_to_json(const LocallyConstantFn& f) {
    json j;
    j["p"] = f.prime();
    j["n"] = f.dim();
    j["ell"] = f.ell();
    j["M"] = f.M();
    json pieces = json::array();
    for (const auto& pc : f.pieces()) {
        if (pc.coeff == 0.0) continue;
        json c = json::array();
        for (int k = 0; k < f.dim(); ++k) c.push_back(pc.ball.center[k].digit_string());
        pieces.push_back({{"center", c}, {"radius_exp", pc.ball.radius_exp}, {"coeff", pc.coeff}});
    }
    j["pieces"] = pieces;
    if (const auto& t = f.tail()) {
        json tj{{"M", t->M}};
        if (!t->table.empty()) tj["table"] = t->table;
        if (t->powers.size() == 1) {
            tj["s"] = t->powers[0].s;
            tj["c"] = t->powers[0].c;
        } else {
            json pw = json::array();
            for (const auto& p : t->powers) pw.push_back({{"s", p.s}, {"c", p.c}});
            tj["powers"] = pw;
        }
        j["tail"] = tj;
    } else {
        j["tail"] = nullptr;
    }
    j["lambda"] = f.lambda;
    j["C"] = f.growth_C;
    return j;
}

LocallyConstantFn function_from_json(const json& j, int p, int n, int ell, int M) {
    if (j.is_number()) {
        LocallyConstantFn f = LocallyConstantFn::constant(p, n, ell, M, j.get<double>());
        return f;
    }
    if (!j.is_object()) throw std::invalid_argument("function must be a number or an object");
    if (j.value("p", p) != p || j.value("n", n) != n) throw std::invalid_argument("function on a different (p, n)");
    std::vector<Piece> pieces;
    for (const auto& pj : j.value("pieces", json::array())) {
        std::vector<PAdicScalar> c;
        const json centre = pj.value("center", json::array());
        for (int k = 0; k < n; ++k) {
            if (k < static_cast<int>(centre.size())) c.push_back(parse_digit_string(centre[static_cast<std::size_t>(k)].get<std::string>(), p));
            else c.push_back(PAdicScalar(p, Window{}));
        }
        pieces.push_back(Piece{Ball{PAdicPoint(std::move(c)), pj.at("radius_exp").get<int>()}, pj.at("coeff").get<double>()});
    }
    std::optional<RadialTail> tail;
    if (j.contains("tail") && !j["tail"].is_null()) {
        const json& tj = j["tail"];
        RadialTail t;
        t.M = tj.value("M", M);
        if (t.M != M) throw std::invalid_argument("tail must start at the grid's M");
        if (tj.contains("table")) t.table = tj["table"].get<std::vector<double>>();
        if (tj.contains("powers")) {
            for (const auto& pw : tj["powers"]) t.powers.push_back({pw.at("s").get<double>(), pw.at("c").get<double>()});
        } else {
            t.powers.push_back({tj.value("s", 0.0), tj.value("c", 0.0)});
        }
        tail = std::move(t);
    }
    LocallyConstantFn f = LocallyConstantFn::from_pieces(p, n, ell, M, pieces, std::move(tail));
    if (j.contains("lambda")) {
        const double lam = j["lambda"].get<double>();
        if (lam < f.lambda) throw std::invalid_argument("declared lambda below the tail's growth");
        f.lambda = lam;
        f.growth_C = mlambda_norm(f, lam);
    }
    return f;
}

}  // namespace padicverify
