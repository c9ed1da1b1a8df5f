#include "afzp/serialize.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <unistd.h>

namespace afzp::io {

namespace {

[[noreturn]] void bad(const std::string& path, const std::string& what) { throw Error(ErrorCode::ParseError, path + ": " + what); }

const json& field(const json& j, const char* key, const std::string& path) {
    if (!j.is_object()) bad(path, "expected an object");
    auto it = j.find(key);
    if (it == j.end()) bad(path, std::string("missing field \"") + key + "\"");
    return *it;
}

void only_keys(const json& j, std::initializer_list<const char*> keys, const std::string& path) {
    if (!j.is_object()) bad(path, "expected an object");
    std::set<std::string> ok(keys.begin(), keys.end());
    ok.insert("afzp_format");
    ok.insert("type");
    for (auto it = j.begin(); it != j.end(); ++it)
        if (!ok.count(it.key())) bad(path, "unknown field \"" + it.key() + "\"");
}

// Nested documents drop the version tag; top-level ones carry it.
void check_header(const json& j, const char* type, const std::string& path) {
    if (!j.is_object()) bad(path, "expected an object");
    if (auto it = j.find("afzp_format"); it != j.end() && (!it->is_number_integer() || it->get<int>() != kFormatVersion))
        bad(path + ".afzp_format", "unsupported format version");
    if (auto it = j.find("type"); it != j.end() && (!it->is_string() || it->get<std::string>() != type))
        bad(path + ".type", std::string("expected \"") + type + "\"");
}

json header(const char* type) {
    json j;
    j["afzp_format"] = kFormatVersion;
    j["type"] = type;
    return j;
}

json nested(json j) {
    j.erase("afzp_format");
    return j;
}

int get_int(const json& j, const std::string& path) {
    if (!j.is_number_integer()) bad(path, "expected an integer");
    return j.get<int>();
}

bool get_bool(const json& j, const std::string& path) {
    if (!j.is_boolean()) bad(path, "expected true or false");
    return j.get<bool>();
}

const json& get_array(const json& j, const std::string& path) {
    if (!j.is_array()) bad(path, "expected an array");
    return j;
}

std::vector<int> int_list(const json& j, const std::string& path, int shift = 0) {
    std::vector<int> out;
    std::size_t i = 0;
    for (const auto& x : get_array(j, path)) out.push_back(get_int(x, path + "[" + std::to_string(i++) + "]") - shift);
    return out;
}

json shifted(const std::vector<int>& v, int shift) {
    json a = json::array();
    for (int x : v) a.push_back(x + shift);
    return a;
}

json int_mat(const IntMat& m) {
    json a = json::array();
    for (const auto& r : m) a.push_back(r);
    return a;
}

IntMat int_mat_from(const json& j, const std::string& path) {
    IntMat out;
    std::size_t i = 0;
    for (const auto& r : get_array(j, path)) out.push_back(int_list(r, path + "[" + std::to_string(i++) + "]"));
    return out;
}

const FieldContext& field_of(const json& j, const std::string& path) {
    const int order = get_int(field(j, "order", path), path + ".order");
    int p = 0;
    if (j.contains("p")) p = get_int(j["p"], path + ".p");
    else p = p_from_order(order);
    try {
        return FieldContext::get(p, order);
    } catch (const Error& e) {
        bad(path, e.what());
    }
}

std::string idx(const std::string& path, std::size_t i) { return path + "[" + std::to_string(i) + "]"; }

std::vector<Mat> mat_list(const json& j, const FieldContext& ctx, const std::string& path) {
    std::vector<Mat> out;
    std::size_t i = 0;
    for (const auto& m : get_array(j, path)) {
        out.push_back(mat_from_json(m, ctx, idx(path, i)));
        ++i;
    }
    return out;
}

json mat_list_json(const std::vector<Mat>& v) {
    json a = json::array();
    for (const auto& m : v) a.push_back(to_json(m));
    return a;
}

json blocks_json(const EqHom& h) {
    json a = json::array();
    for (const auto& ar : h.blocks) {
        json slots = json::array();
        for (const auto& sl : ar.slots) {
            json s;
            s["source"] = sl.source + 1;
            s["mult"] = sl.mult;
            if (!sl.phases.empty()) s["phases"] = sl.phases;
            slots.push_back(s);
        }
        json b;
        b["slots"] = slots;
        b["x"] = to_json(ar.x);
        a.push_back(b);
    }
    return a;
}

// Hom body without its endpoints (used inside towers and certificates).
json hom_body(const EqHom& h) {
    json j;
    j["unital"] = h.unital;
    j["blocks"] = blocks_json(h);
    return j;
}

EqHom hom_body_from(const json& j, std::shared_ptr<const CanonicalForm> src, std::shared_ptr<const CanonicalForm> tgt,
                    const std::string& path) {
    only_keys(j, {"unital", "blocks", "source", "target"}, path);
    EqHom h;
    h.source = std::move(src);
    h.target = std::move(tgt);
    h.unital = get_bool(field(j, "unital", path), path + ".unital");
    const auto& ctx = *h.target->ctx;
    const auto& bl = get_array(field(j, "blocks", path), path + ".blocks");
    const int ns = h.source->block_count();
    const auto ssizes = h.source->block_sizes(), tsizes = h.target->block_sizes();
    if (static_cast<int>(bl.size()) != h.target->block_count()) bad(path + ".blocks", "one arrangement per target block required");
    std::size_t t = 0;
    for (const auto& b : bl) {
        const std::string bp = idx(path + ".blocks", t++);
        only_keys(b, {"slots", "x"}, bp);
        Arrangement ar{{}, mat_from_json(field(b, "x", bp), ctx, bp + ".x")};
        std::size_t k = 0;
        for (const auto& s : get_array(field(b, "slots", bp), bp + ".slots")) {
            const std::string sp = idx(bp + ".slots", k++);
            only_keys(s, {"source", "mult", "phases"}, sp);
            Slot sl;
            sl.source = get_int(field(s, "source", sp), sp + ".source") - 1;
            if (sl.source < 0 || sl.source >= ns) bad(sp + ".source", "no such source block");
            sl.mult = get_int(field(s, "mult", sp), sp + ".mult");
            if (sl.mult < 1) bad(sp + ".mult", "multiplicity must be positive");
            if (s.contains("phases")) sl.phases = int_list(s["phases"], sp + ".phases");
            ar.slots.push_back(std::move(sl));
        }
        if (ar.x.rows() != ar.x.cols() || ar.x.rows() != tsizes[t - 1]) bad(bp + ".x", "wrong size");
        int used = 0;
        for (const auto& sl : ar.slots) used += ssizes[static_cast<std::size_t>(sl.source)] * sl.mult;
        if (used > ar.x.rows()) bad(bp + ".slots", "slots overflow the target block");
        h.blocks.push_back(std::move(ar));
    }
    return h;
}

}  // namespace

int p_from_order(int order) {
    if (order >= 2 && FieldContext::is_prime(order)) return order;
    for (int q = 2; q * q <= order; ++q) {
        if (!FieldContext::is_prime(q)) continue;
        if (q * q == order || 4 * q * q == order) return q;
    }
    throw Error(ErrorCode::UnsupportedOrder, "field order " + std::to_string(order) + " is not p, p^2 or 4p^2");
}

json to_json(const Rational& r) { return r.to_string(); }

Rational rational_from_json(const json& j, const std::string& path) {
    if (j.is_number_integer()) return Rational(j.get<std::int64_t>());
    if (!j.is_string()) bad(path, "expected a rational string \"a/b\"");
    try {
        return Rational::parse(j.get<std::string>());
    } catch (const Error& e) {
        bad(path, e.what());
    }
}

json to_json(const Scalar& s) {
    json j;
    j["order"] = s.context().order();
    json c = json::array();
    for (const auto& r : s.raw()) c.push_back(to_json(r));
    j["coeffs"] = c;
    return j;
}

Scalar scalar_from_json(const json& j, const FieldContext* ctx, const std::string& path) {
    // shorthand inputs: "a/b", an integer, or {"zeta": k} for zeta_N^k
    if (j.is_string() || j.is_number_integer()) {
        if (!ctx) bad(path, "a bare rational needs a field");
        return Scalar(*ctx, rational_from_json(j, path));
    }
    if (!j.is_object()) bad(path, "expected a scalar object");
    if (j.contains("zeta")) {
        only_keys(j, {"zeta", "order"}, path);
        const FieldContext& f = ctx ? *ctx : field_of(j, path);
        return Scalar::root(f, get_int(j["zeta"], path + ".zeta"));
    }
    only_keys(j, {"order", "coeffs"}, path);
    const int order = get_int(field(j, "order", path), path + ".order");
    const FieldContext& f = ctx ? *ctx : field_of(j, path);
    if (order != f.order()) bad(path + ".order", "scalar over Q(zeta_" + std::to_string(order) + ") inside Q(zeta_" + std::to_string(f.order()) + ")");
    const auto& cs = get_array(field(j, "coeffs", path), path + ".coeffs");
    if (cs.empty()) return Scalar(f);
    if (static_cast<int>(cs.size()) != f.degree())
        bad(path + ".coeffs", "expected " + std::to_string(f.degree()) + " coefficients (or none for zero)");
    std::vector<Rational> c;
    for (std::size_t i = 0; i < cs.size(); ++i) c.push_back(rational_from_json(cs[i], idx(path + ".coeffs", i)));
    return Scalar(f, std::move(c));
}

json to_json(const Mat& m) {
    json j;
    j["rows"] = m.rows();
    j["cols"] = m.cols();
    json rows = json::array();
    for (int i = 0; i < m.rows(); ++i) {
        json r = json::array();
        for (int c = 0; c < m.cols(); ++c) r.push_back(to_json(m(i, c)));
        rows.push_back(r);
    }
    j["entries"] = rows;
    return j;
}

Mat mat_from_json(const json& j, const FieldContext& ctx, const std::string& path) {
    only_keys(j, {"rows", "cols", "entries"}, path);
    const int r = get_int(field(j, "rows", path), path + ".rows"), c = get_int(field(j, "cols", path), path + ".cols");
    if (r < 0 || c < 0) bad(path, "negative dimension");
    const auto& e = get_array(field(j, "entries", path), path + ".entries");
    if (static_cast<int>(e.size()) != r) bad(path + ".entries", "expected " + std::to_string(r) + " rows");
    Mat m(ctx, r, c);
    for (int i = 0; i < r; ++i) {
        const std::string rp = idx(path + ".entries", static_cast<std::size_t>(i));
        const auto& row = get_array(e[static_cast<std::size_t>(i)], rp);
        if (static_cast<int>(row.size()) != c) bad(rp, "expected " + std::to_string(c) + " entries");
        for (int k = 0; k < c; ++k) m.at(i, k) = scalar_from_json(row[static_cast<std::size_t>(k)], &ctx, idx(rp, static_cast<std::size_t>(k)));
    }
    return m;
}

json to_json(const FdSystem& s) {
    json j = header("system");
    j["p"] = s.p();
    j["order"] = s.ctx->order();
    j["blocks"] = s.blocks;
    j["sigma"] = shifted(s.sigma, 1);
    j["impl"] = mat_list_json(s.impl);
    return j;
}

FdSystem system_from_json(const json& j, const std::string& path) {
    check_header(j, "system", path);
    only_keys(j, {"p", "order", "blocks", "sigma", "impl"}, path);
    FdSystem s;
    s.ctx = &field_of(j, path);
    s.blocks = int_list(field(j, "blocks", path), path + ".blocks");
    s.sigma = int_list(field(j, "sigma", path), path + ".sigma", 1);
    s.impl = mat_list(field(j, "impl", path), *s.ctx, path + ".impl");
    if (s.sigma.size() != s.blocks.size() || s.impl.size() != s.blocks.size())
        bad(path, "blocks, sigma and impl need the same length");
    for (std::size_t i = 0; i < s.blocks.size(); ++i) {
        if (s.blocks[i] < 1) bad(idx(path + ".blocks", i), "block size must be positive");
        if (s.sigma[i] < 0 || s.sigma[i] >= static_cast<int>(s.blocks.size())) bad(idx(path + ".sigma", i), "not a block index (1-based)");
    }
    return s;
}

json to_json(const CanonicalForm& c) {
    json j = header("canonical");
    j["p"] = c.p();
    j["order"] = c.ctx->order();
    json ps = json::array();
    for (const auto& pc : c.pieces) {
        json x;
        x["kind"] = pc.kind == PieceKind::Fixed ? "fixed" : "cycle";
        x["n"] = pc.n;
        if (pc.v) x["v"] = to_json(*pc.v);
        ps.push_back(x);
    }
    j["pieces"] = ps;
    json iso;
    iso["block_map"] = shifted(c.block_map, 1);
    iso["conjugators"] = mat_list_json(c.conjugators);
    j["iso"] = iso;
    return j;
}

std::shared_ptr<const CanonicalForm> canonical_from_json(const json& j, const std::string& path) {
    check_header(j, "canonical", path);
    only_keys(j, {"p", "order", "pieces", "iso"}, path);
    CanonicalForm c;
    c.ctx = &field_of(j, path);
    std::size_t i = 0;
    for (const auto& x : get_array(field(j, "pieces", path), path + ".pieces")) {
        const std::string pp = idx(path + ".pieces", i++);
        only_keys(x, {"kind", "n", "v"}, pp);
        const auto& kind = field(x, "kind", pp);
        IrredPiece pc;
        pc.n = get_int(field(x, "n", pp), pp + ".n");
        if (pc.n < 1) bad(pp + ".n", "size must be positive");
        if (kind == "fixed") {
            pc.kind = PieceKind::Fixed;
            pc.v = mat_from_json(field(x, "v", pp), *c.ctx, pp + ".v");
            if (pc.v->rows() != pc.n || pc.v->cols() != pc.n) bad(pp + ".v", "must be n x n");
        } else if (kind == "cycle") {
            pc.kind = PieceKind::Cycle;
            if (x.contains("v")) bad(pp + ".v", "a cycle piece has no V");
        } else {
            bad(pp + ".kind", "expected \"fixed\" or \"cycle\"");
        }
        c.pieces.push_back(std::move(pc));
    }
    auto sizes = c.block_sizes();
    if (j.contains("iso")) {
        const auto& iso = j["iso"];
        only_keys(iso, {"block_map", "conjugators"}, path + ".iso");
        c.block_map = int_list(field(iso, "block_map", path + ".iso"), path + ".iso.block_map", 1);
        c.conjugators = mat_list(field(iso, "conjugators", path + ".iso"), *c.ctx, path + ".iso.conjugators");
        if (c.block_map.size() != sizes.size() || c.conjugators.size() != sizes.size())
            bad(path + ".iso", "one entry per canonical block required");
        for (std::size_t b = 0; b < sizes.size(); ++b)
            if (c.conjugators[b].rows() != sizes[b] || c.conjugators[b].cols() != sizes[b])
                bad(idx(path + ".iso.conjugators", b), "wrong size");
    } else {
        c = make_canonical(*c.ctx, c.pieces);
    }
    return std::make_shared<const CanonicalForm>(std::move(c));
}

json to_json(const EqHom& h) {
    json j = header("hom");
    j["source"] = nested(to_json(*h.source));
    j["target"] = nested(to_json(*h.target));
    json body = hom_body(h);
    for (auto& [k, v] : body.items()) j[k] = v;
    return j;
}

EqHom hom_from_json(const json& j, const std::string& path) {
    check_header(j, "hom", path);
    auto src = canonical_from_json(field(j, "source", path), path + ".source");
    auto tgt = canonical_from_json(field(j, "target", path), path + ".target");
    if (src->ctx != tgt->ctx) bad(path, "source and target over different fields");
    return hom_body_from(j, src, tgt, path);
}

json element_to_json(const FieldContext& ctx, const Element& w) {
    json j = header("element");
    j["p"] = ctx.p();
    j["order"] = ctx.order();
    j["blocks"] = mat_list_json(w);
    return j;
}

Element element_from_json(const json& j, const std::string& path) {
    check_header(j, "element", path);
    only_keys(j, {"p", "order", "blocks"}, path);
    return mat_list(field(j, "blocks", path), field_of(j, path), path + ".blocks");
}

json to_json(const CrossedPresentation& cp) {
    json j = header("crossed");
    j["p"] = cp.p();
    j["order"] = cp.ctx().order();
    j["source"] = nested(to_json(*cp.source));
    FdSystem d = dual_system(cp);
    j["blocks"] = cp.target_blocks;
    j["sigma"] = shifted(d.sigma, 1);
    j["impl"] = mat_list_json(d.impl);
    j["block_piece"] = shifted(cp.block_piece, 1);
    j["special"] = cp.special;
    j["iota"] = int_mat(cp.iota);
    j["identify"] = to_json(identify_matrix(cp));
    return j;
}

CrossedPresentation crossed_from_json(const json& j, const std::string& path) {
    check_header(j, "crossed", path);
    only_keys(j, {"p", "order", "source", "blocks", "sigma", "impl", "block_piece", "special", "iota", "identify"}, path);
    auto src = canonical_from_json(field(j, "source", path), path + ".source");
    CrossedPresentation cp = crossed_product(src);
    // everything else is determined by the source; insist that it matches
    json expect = to_json(cp);
    for (auto it = j.begin(); it != j.end(); ++it) {
        if (it.key() == "source" || it.key() == "afzp_format" || it.key() == "type") continue;
        if (!expect.contains(it.key())) continue;
        if (expect[it.key()] != *it) bad(path + "." + it.key(), "does not match the crossed product of the source");
    }
    return cp;
}

json to_json(const KInvariant& k) {
    json j = header("kinvariant");
    j["m"] = k.m;
    j["unit"] = k.unit;
    j["act"] = int_mat(k.act);
    j["mc"] = k.mc;
    j["dual_act"] = int_mat(k.dual_act);
    j["special"] = k.special;
    j["iota"] = int_mat(k.iota);
    return j;
}

KInvariant kinvariant_from_json(const json& j, const std::string& path) {
    check_header(j, "kinvariant", path);
    only_keys(j, {"m", "unit", "act", "mc", "dual_act", "special", "iota"}, path);
    KInvariant k;
    k.m = get_int(field(j, "m", path), path + ".m");
    k.unit = int_list(field(j, "unit", path), path + ".unit");
    k.act = int_mat_from(field(j, "act", path), path + ".act");
    k.mc = get_int(field(j, "mc", path), path + ".mc");
    k.dual_act = int_mat_from(field(j, "dual_act", path), path + ".dual_act");
    k.special = int_list(field(j, "special", path), path + ".special");
    k.iota = int_mat_from(field(j, "iota", path), path + ".iota");
    auto shape = [&](const IntMat& m, int r, int c, const char* name) {
        bool ok = static_cast<int>(m.size()) == r;
        for (const auto& row : m) ok = ok && static_cast<int>(row.size()) == c;
        if (!ok) bad(path + "." + name, "expected " + std::to_string(r) + " x " + std::to_string(c));
    };
    if (static_cast<int>(k.unit.size()) != k.m) bad(path + ".unit", "length must be m");
    if (static_cast<int>(k.special.size()) != k.mc) bad(path + ".special", "length must be mc");
    shape(k.act, k.m, k.m, "act");
    shape(k.dual_act, k.mc, k.mc, "dual_act");
    shape(k.iota, k.mc, k.m, "iota");
    return k;
}

json to_json(const KPair& k) {
    json j = header("kpair");
    j["unital"] = k.unital;
    j["f"] = int_mat(k.f);
    j["phi"] = int_mat(k.phi);
    return j;
}

KPair kpair_from_json(const json& j, const std::string& path) {
    check_header(j, "kpair", path);
    only_keys(j, {"unital", "f", "phi"}, path);
    KPair k;
    k.unital = j.contains("unital") ? get_bool(j["unital"], path + ".unital") : true;
    k.f = int_mat_from(field(j, "f", path), path + ".f");
    k.phi = int_mat_from(field(j, "phi", path), path + ".phi");
    return k;
}

json to_json(const EquivResult& r, const FieldContext& ctx) {
    json j = header("equiv");
    j["p"] = ctx.p();
    j["order"] = ctx.order();
    j["w"] = mat_list_json(r.w);
    json ws = json::array();
    for (const auto& b : r.witness.blocks) {
        json x;
        x["block"] = b.block + 1;
        x["method"] = b.method;
        x["l1"] = mat_list_json(b.l1);
        x["l2"] = mat_list_json(b.l2);
        x["z"] = to_json(b.z);
        x["w"] = to_json(b.w);
        ws.push_back(x);
    }
    j["witness"] = ws;
    return j;
}

EquivResult equiv_from_json(const json& j, const std::string& path) {
    check_header(j, "equiv", path);
    only_keys(j, {"p", "order", "w", "witness"}, path);
    const FieldContext& ctx = field_of(j, path);
    EquivResult r;
    r.w = mat_list(field(j, "w", path), ctx, path + ".w");
    std::size_t i = 0;
    for (const auto& x : get_array(field(j, "witness", path), path + ".witness")) {
        const std::string wp = idx(path + ".witness", i++);
        only_keys(x, {"block", "method", "l1", "l2", "z", "w"}, wp);
        const auto& m = field(x, "method", wp);
        if (!m.is_string()) bad(wp + ".method", "expected a string");
        r.witness.blocks.push_back({get_int(field(x, "block", wp), wp + ".block") - 1, m.get<std::string>(),
                                    mat_list(field(x, "l1", wp), ctx, wp + ".l1"), mat_list(field(x, "l2", wp), ctx, wp + ".l2"),
                                    mat_from_json(field(x, "z", wp), ctx, wp + ".z"), mat_from_json(field(x, "w", wp), ctx, wp + ".w")});
    }
    return r;
}

json to_json(const Tower& t) {
    json j = header("tower");
    if (!t.systems.empty()) {
        j["p"] = t.systems[0]->p();
        j["order"] = t.systems[0]->ctx->order();
    }
    json st = json::array();
    for (const auto& s : t.systems) st.push_back(nested(to_json(*s)));
    j["stages"] = st;
    json maps = json::array();
    for (const auto& h : t.maps) maps.push_back(hom_body(h));
    j["maps"] = maps;
    return j;
}

Tower tower_from_json(const json& j, const std::string& path) {
    check_header(j, "tower", path);
    only_keys(j, {"p", "order", "stages", "maps"}, path);
    Tower t;
    std::size_t i = 0;
    for (const auto& s : get_array(field(j, "stages", path), path + ".stages")) {
        t.systems.push_back(canonical_from_json(s, idx(path + ".stages", i)));
        if (t.systems.back()->ctx != t.systems.front()->ctx) bad(idx(path + ".stages", i), "stages over different fields");
        ++i;
    }
    if (t.systems.empty()) bad(path + ".stages", "a tower needs at least one stage");
    const auto& maps = get_array(field(j, "maps", path), path + ".maps");
    if (maps.size() + 1 != t.systems.size()) bad(path + ".maps", "need one map between consecutive stages");
    for (std::size_t k = 0; k < maps.size(); ++k) t.maps.push_back(hom_body_from(maps[k], t.systems[k], t.systems[k + 1], idx(path + ".maps", k)));
    return t;
}

json to_json(const IntertwiningCertificate& c) {
    json j = header("certificate");
    j["a"] = nested(to_json(c.a));
    j["b"] = nested(to_json(c.b));
    j["n"] = c.n;
    j["m"] = c.m;
    json pp = json::array(), cp = json::array(), ps = json::array(), cs = json::array(), cor = json::array();
    for (const auto& k : c.psi_pairs) pp.push_back(nested(to_json(k)));
    for (const auto& k : c.chi_pairs) cp.push_back(nested(to_json(k)));
    for (const auto& h : c.psi) ps.push_back(hom_body(h));
    for (const auto& h : c.chi) cs.push_back(hom_body(h));
    for (const auto& x : c.corrections) {
        json e;
        e["map"] = x.map;
        e["uncorrected"] = hom_body(x.uncorrected);
        e["w"] = mat_list_json(x.w);
        cor.push_back(e);
    }
    j["psi_pairs"] = pp;
    j["chi_pairs"] = cp;
    j["psi"] = ps;
    j["chi"] = cs;
    j["corrections"] = cor;
    return j;
}

IntertwiningCertificate certificate_from_json(const json& j, const std::string& path) {
    check_header(j, "certificate", path);
    only_keys(j, {"a", "b", "n", "m", "psi_pairs", "chi_pairs", "psi", "chi", "corrections"}, path);
    IntertwiningCertificate c;
    c.a = tower_from_json(field(j, "a", path), path + ".a");
    c.b = tower_from_json(field(j, "b", path), path + ".b");
    if (c.a.systems[0]->ctx != c.b.systems[0]->ctx) bad(path, "towers over different fields");
    c.n = int_list(field(j, "n", path), path + ".n");
    c.m = int_list(field(j, "m", path), path + ".m");
    auto pairs = [&](const char* key) {
        std::vector<KPair> out;
        std::size_t i = 0;
        for (const auto& x : get_array(field(j, key, path), path + "." + key)) out.push_back(kpair_from_json(x, idx(path + "." + key, i++)));
        return out;
    };
    c.psi_pairs = pairs("psi_pairs");
    c.chi_pairs = pairs("chi_pairs");
    const std::size_t d = c.m.size();
    if (c.n.size() != d + 1) bad(path + ".n", "needs one more entry than m");
    for (std::size_t r = 0; r < c.n.size(); ++r)
        if (c.n[r] < 0 || c.n[r] >= c.a.length()) bad(idx(path + ".n", r), "no such stage of tower a");
    for (std::size_t r = 0; r < d; ++r)
        if (c.m[r] < 0 || c.m[r] >= c.b.length()) bad(idx(path + ".m", r), "no such stage of tower b");
    const auto& ps = get_array(field(j, "psi", path), path + ".psi");
    const auto& cs = get_array(field(j, "chi", path), path + ".chi");
    if (ps.size() != d || cs.size() != d) bad(path, "psi and chi need one entry per entry of m");
    auto A = [&](int i) { return c.a.systems[static_cast<std::size_t>(i)]; };
    auto B = [&](int i) { return c.b.systems[static_cast<std::size_t>(i)]; };
    for (std::size_t r = 0; r < d; ++r) {
        c.psi.push_back(hom_body_from(ps[r], A(c.n[r]), B(c.m[r]), idx(path + ".psi", r)));
        c.chi.push_back(hom_body_from(cs[r], B(c.m[r]), A(c.n[r + 1]), idx(path + ".chi", r)));
    }
    std::size_t i = 0;
    for (const auto& x : get_array(field(j, "corrections", path), path + ".corrections")) {
        const std::string cp = idx(path + ".corrections", i++);
        only_keys(x, {"map", "uncorrected", "w"}, cp);
        const auto& name = field(x, "map", cp);
        if (!name.is_string()) bad(cp + ".map", "expected \"psi r\" or \"chi r\"");
        std::istringstream is(name.get<std::string>());
        std::string kind;
        std::size_t r = 0;
        if (!(is >> kind >> r) || (kind != "psi" && kind != "chi") || r >= d) bad(cp + ".map", "expected \"psi r\" or \"chi r\" with r < " + std::to_string(d));
        const EqHom& target = kind == "psi" ? c.psi[r] : c.chi[r];
        Correction corr{name.get<std::string>(), hom_body_from(field(x, "uncorrected", cp), target.source, target.target, cp + ".uncorrected"),
                        mat_list(field(x, "w", cp), *target.target->ctx, cp + ".w")};
        c.corrections.push_back(std::move(corr));
    }
    return c;
}

json to_json(const Report& r) {
    json j = header("report");
    j["ok"] = r.ok();
    json vs = json::array();
    for (const auto& v : r.violations) {
        json x;
        x["where"] = v.where;
        x["identity"] = v.identity;
        x["detail"] = v.detail;
        vs.push_back(x);
    }
    j["violations"] = vs;
    j["notes"] = r.notes;
    return j;
}

json parse_text(const std::string& text, const std::string& source) {
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        std::size_t line = 1, col = 1;
        for (std::size_t k = 0; k + 1 < e.byte && k < text.size(); ++k) {
            if (text[k] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
        }
        throw Error(ErrorCode::ParseError, source + ":" + std::to_string(line) + ":" + std::to_string(col) + ": malformed JSON");
    }
}

json load_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::ParseError, path + ": cannot open");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_text(ss.str(), path);
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

void write_atomic(const std::string& path, const std::string& text) {
    namespace fs = std::filesystem;
    fs::path target(path);
    fs::path dir = target.has_parent_path() ? target.parent_path() : fs::path(".");
    std::string tmpl = (dir / ("." + target.filename().string() + ".XXXXXX")).string();
    std::vector<char> buf(tmpl.begin(), tmpl.end());
    buf.push_back('\0');
    int fd = mkstemp(buf.data());
    if (fd < 0) throw Error(ErrorCode::ParseError, path + ": cannot create temporary file");
    std::size_t off = 0;
    while (off < text.size()) {
        ssize_t w = ::write(fd, text.data() + off, text.size() - off);
        if (w <= 0) {
            ::close(fd);
            std::remove(buf.data());
            throw Error(ErrorCode::ParseError, path + ": write failed");
        }
        off += static_cast<std::size_t>(w);
    }
    ::fsync(fd);
    ::close(fd);
    std::error_code ec;
    fs::rename(buf.data(), target, ec);
    if (ec) {
        std::remove(buf.data());
        throw Error(ErrorCode::ParseError, path + ": " + ec.message());
    }
}

std::string document_type(const json& j) {
    if (!j.is_object()) bad("$", "expected an object");
    auto v = j.find("afzp_format");
    if (v == j.end()) bad("$", "missing field \"afzp_format\"");
    if (!v->is_number_integer() || v->get<int>() != kFormatVersion) bad("$.afzp_format", "unsupported format version");
    const auto& t = field(j, "type", "$");
    if (!t.is_string()) bad("$.type", "expected a string");
    return t.get<std::string>();
}

FdSystem embed_system(const FdSystem& s, const FieldContext& target) {
    if (target.p() != s.p()) throw Error(ErrorCode::ContextMismatch, "different group order");
    FdSystem out = s;
    out.ctx = &target;
    for (auto& m : out.impl) {
        Mat e(target, m.rows(), m.cols());
        for (int i = 0; i < m.rows(); ++i)
            for (int k = 0; k < m.cols(); ++k) e.at(i, k) = m(i, k).embed(target);
        m = std::move(e);
    }
    return out;
}

}  // namespace afzp::io
