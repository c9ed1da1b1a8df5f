// afzp: command-line front end over the library.
// Exit codes: 0 success/pass, 1 mathematical failure, 2 input or format error.

#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <mutex>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "afzp/serialize.hpp"

using namespace afzp;
using namespace afzp::io;

namespace {

struct Options {
    std::optional<int> order;
    int bound = 3;
    int depth = 3;
    int jobs = 1;
    std::string format = "json";
    std::string out;
};

Options opt;

std::ostream& operator<<(std::ostream& os, ErrorCode c) { return os << to_string(c); }

int exit_code_for(const Error& e) {
    switch (e.code()) {
        case ErrorCode::ParseError:
        case ErrorCode::UnsupportedOrder:
        case ErrorCode::ContextMismatch:
        case ErrorCode::ShapeMismatch:
            return 2;
        default:
            return 1;
    }
}

std::optional<int> order_override() {
    if (opt.order) return opt.order;
    if (const char* env = std::getenv("AFZP_ORDER"); env && *env) {
        try {
            return std::stoi(env);
        } catch (const std::exception&) {
            throw Error(ErrorCode::ParseError, std::string("AFZP_ORDER: not an integer: ") + env);
        }
    }
    return std::nullopt;
}

// A system file may leave out "order"; it then uses --order / AFZP_ORDER / 4p^2.
FdSystem read_system(json j, const std::string& path) {
    auto ov = order_override();
    if (!j.contains("order")) {
        if (!j.contains("p") || !j["p"].is_number_integer()) throw Error(ErrorCode::ParseError, path + ": $: need \"p\" when \"order\" is absent");
        const int p = j["p"].get<int>();
        j["order"] = ov ? *ov : 4 * p * p;
        return system_from_json(j, path);
    }
    FdSystem s = system_from_json(j, path);
    if (ov && *ov != s.ctx->order()) return embed_system(s, FieldContext::get(s.p(), *ov));
    return s;
}

std::string type_of(const json& j) { return document_type(j); }

std::shared_ptr<const CanonicalForm> read_canonical(const std::string& path) {
    json j = load_file(path);
    auto t = type_of(j);
    if (t == "canonical") return canonical_from_json(j, path);
    if (t == "system") return std::make_shared<const CanonicalForm>(decompose(read_system(j, path)));
    throw Error(ErrorCode::ParseError, path + ": expected a system or canonical document, got \"" + t + "\"");
}

KInvariant read_invariant(const std::string& path) {
    json j = load_file(path);
    if (type_of(j) == "kinvariant") return kinvariant_from_json(j, path);
    return invariant_of(*read_canonical(path));
}

EqHom read_hom(const std::string& path) {
    json j = load_file(path);
    if (type_of(j) != "hom") throw Error(ErrorCode::ParseError, path + ": expected a hom document");
    return hom_from_json(j, path);
}

std::string int_mat_text(const IntMat& m) {
    std::ostringstream os;
    for (const auto& r : m) {
        os << "  ";
        for (std::size_t i = 0; i < r.size(); ++i) os << (i ? " " : "") << r[i];
        os << "\n";
    }
    return os.str();
}

std::string vec_text(const std::vector<int>& v) {
    std::ostringstream os;
    os << "(";
    for (std::size_t i = 0; i < v.size(); ++i) os << (i ? ", " : "") << v[i];
    os << ")";
    return os.str();
}

// Human-readable rendering; documents without a text form fall back to JSON.
std::string render_text(const json& j) {
    const std::string t = j.value("type", "");
    std::ostringstream os;
    if (t == "report") {
        os << (j["ok"].get<bool>() ? "PASS" : "FAIL") << "\n";
        for (const auto& v : j["violations"]) {
            os << "  [" << v["where"].get<std::string>() << "] " << v["identity"].get<std::string>();
            if (!v["detail"].get<std::string>().empty()) os << " -- " << v["detail"].get<std::string>();
            os << "\n";
        }
        for (const auto& n : j["notes"]) os << "  note: " << n.get<std::string>() << "\n";
        return os.str();
    }
    if (t == "kinvariant") {
        auto k = kinvariant_from_json(j);
        os << "K0(A) = Z^" << k.m << ", unit " << vec_text(k.unit) << "\naction\n" << int_mat_text(k.act);
        os << "K0(A x| Z_p) = Z^" << k.mc << ", special " << vec_text(k.special) << "\ndual action\n" << int_mat_text(k.dual_act);
        os << "iota\n" << int_mat_text(k.iota);
        return os.str();
    }
    if (t == "kpair") {
        auto k = kpair_from_json(j);
        os << (k.unital ? "unital" : "non-unital") << "\nF\n" << int_mat_text(k.f) << "phi\n" << int_mat_text(k.phi);
        return os.str();
    }
    if (t == "canonical") {
        auto c = canonical_from_json(j);
        os << "p = " << c->p() << ", Q(zeta_" << c->ctx->order() << ")\n";
        for (const auto& pc : c->pieces) {
            if (pc.kind == PieceKind::Fixed)
                os << "  Fixed (M_" << pc.n << ", V = diag exponents " << vec_text(p_diagonal_exponents(*pc.v)) << ")\n";
            else
                os << "  Cycle (M_" << pc.n << ")^" << c->p() << "\n";
        }
        return os.str();
    }
    if (t == "hom") {
        auto h = hom_from_json(j);
        for (std::size_t b = 0; b < h.blocks.size(); ++b) {
            os << "target block " << b + 1 << ":";
            for (const auto& sl : h.blocks[b].slots) os << " " << sl.mult << " x block " << sl.source + 1;
            os << "\n  X = " << h.blocks[b].x.to_string() << "\n";
        }
        return os.str();
    }
    return dump(j);
}

void emit(const json& j) {
    std::string text = opt.format == "text" ? render_text(j) : dump(j);
    if (opt.out.empty() || opt.out == "-") std::cout << text << std::flush;
    else write_atomic(opt.out, text);
}

int emit_report(const Report& r) {
    emit(to_json(r));
    return r.ok() ? 0 : 1;
}

// ---------------------------------------------------------------------------

// validate accepts systems, homs and towers.
std::pair<json, int> do_validate(const std::string& path) {
    json j = load_file(path);
    auto t = type_of(j);
    Report r;
    if (t == "system") r = validate(read_system(j, path));
    else if (t == "hom") r = hom_validate(hom_from_json(j, path));
    else if (t == "tower") r = tower_validate(tower_from_json(j, path));
    else throw Error(ErrorCode::ParseError, path + ": validate takes a system, hom or tower document");
    return {to_json(r), r.ok() ? 0 : 1};
}

std::pair<json, int> do_canon(const std::string& path) {
    json j = load_file(path);
    if (type_of(j) != "system") throw Error(ErrorCode::ParseError, path + ": canon takes a system document");
    return {to_json(decompose(read_system(j, path))), 0};
}

std::pair<json, int> do_crossed(const std::string& path) { return {to_json(crossed_product(read_canonical(path))), 0}; }

std::pair<json, int> do_kinv(const std::string& path) { return {to_json(invariant_of(*read_canonical(path))), 0}; }

// One input per job; several inputs run on --jobs threads and print in input order.
int run_batch(const std::vector<std::string>& files, const std::function<std::pair<json, int>(const std::string&)>& f) {
    if (files.size() == 1) {
        auto [j, code] = f(files[0]);
        emit(j);
        return code;
    }
    std::vector<json> results(files.size());
    std::vector<int> codes(files.size(), 0);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i; (i = next++) < files.size();) {
            try {
                std::tie(results[i], codes[i]) = f(files[i]);
            } catch (const Error& e) {
                codes[i] = exit_code_for(e);
                results[i] = json{{"error", e.what()}};
            }
        }
    };
    std::vector<std::thread> pool;
    const int n = std::max(1, std::min<int>(opt.jobs, static_cast<int>(files.size())));
    for (int k = 0; k < n; ++k) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
    int code = 0;
    json all = json::array();
    for (std::size_t i = 0; i < files.size(); ++i) {
        all.push_back(json{{"file", files[i]}, {"exit", codes[i]}, {"result", results[i]}});
        code = std::max(code, codes[i]);
    }
    if (opt.format == "text") {
        std::ostringstream os;
        for (std::size_t i = 0; i < files.size(); ++i)
            os << "== " << files[i] << "\n" << (results[i].contains("error") ? results[i]["error"].get<std::string>() + "\n" : render_text(results[i]));
        if (opt.out.empty() || opt.out == "-") std::cout << os.str();
        else write_atomic(opt.out, os.str());
    } else {
        emit(all);
    }
    return code;
}

std::vector<KPair> read_pairs(const std::string& path) {
    json j = load_file(path);
    const json* arr = &j;
    if (j.is_object()) {
        if (type_of(j) != "kpairs") throw Error(ErrorCode::ParseError, path + ": expected a kpairs document");
        arr = &j.at("pairs");
    }
    if (!arr->is_array()) throw Error(ErrorCode::ParseError, path + ": $.pairs: expected an array");
    std::vector<KPair> out;
    for (std::size_t i = 0; i < arr->size(); ++i) out.push_back(kpair_from_json((*arr)[i], path + ": $.pairs[" + std::to_string(i) + "]"));
    return out;
}

Tower read_tower(const std::string& path) {
    json j = load_file(path);
    if (type_of(j) != "tower") throw Error(ErrorCode::ParseError, path + ": expected a tower document");
    return tower_from_json(j, path);
}

// ---------------------------------------------------------------------------
// demos

int demo_product(int p, int depth) {
    const FieldContext& f = FieldContext::default_for(p);
    std::cout << "product-type tower, p = " << p << ", v_n = diag(zeta_p^0, ..., zeta_p^" << p - 1 << ")^(x)n, depth " << depth << "\n";
    Tower a = product_tower(f, depth + 1);
    auto ra = tower_validate(a);
    std::cout << "tower validation: " << (ra.ok() ? "PASS" : "FAIL") << "\n";
    if (!ra.ok()) return 1;
    IntertwineOptions o;
    o.depth = depth;
    o.bound = opt.bound;
    for (int i = 0; i < depth; ++i) o.pairs.push_back(identity_pair(invariant_of(*a.systems[static_cast<std::size_t>(i)])));
    auto self = intertwine(a, a, o);
    auto r1 = verify(self);
    std::cout << "self-intertwining, identity K-pairs: " << self.corrections.size() << " corrections, verify "
              << (r1.ok() ? "PASS" : "FAIL") << "\n";
    Tower b = sorted_product_tower(f, depth + 1);
    IntertwineOptions o2;
    o2.depth = depth;
    o2.bound = opt.bound;
    auto cross = intertwine(a, b, o2);
    auto r2 = verify(cross);
    int nontrivial = 0;
    for (const auto& c : cross.corrections)
        for (const auto& w : c.w) nontrivial += !w.is_identity();
    std::cout << "against the re-sorted tower, searched K-pairs: " << nontrivial << " nontrivial correction blocks, verify "
              << (r2.ok() ? "PASS" : "FAIL") << "\n";
    if (!r1.ok()) std::cout << r1.to_text();
    if (!r2.ok()) std::cout << r2.to_text();
    if (!opt.out.empty()) write_atomic(opt.out, dump(to_json(self)));
    std::cout << (r1.ok() && r2.ok() ? "PASS" : "FAIL") << "\n";
    return r1.ok() && r2.ok() ? 0 : 1;
}

int demo_naive() {
    const FieldContext& f = FieldContext::default_for(2);
    Tower t = naive_tower(f, 3);
    std::cout << "doubling tower: alpha_n = Ad diag(1,...,1,-1) on M_{2^n}, a -> diag(a, a)\n";
    auto rep = tower_validate(t);
    std::cout << "tower validation: " << rep.to_text();
    bool reproduced = !rep.ok();
    for (int i = 0; i + 1 < t.length(); ++i) {
        auto a = invariant_of(*t.systems[static_cast<std::size_t>(i)]);
        auto b = invariant_of(*t.systems[static_cast<std::size_t>(i + 1)]);
        auto ks = ksearch(a, b, 3);
        std::cout << "ksearch M_" << (2 << i) << " -> M_" << (4 << i) << " (bound 3, unital): " << ks.size() << " pairs\n";
        reproduced = reproduced && ks.empty();
        auto obs = special_obstructions(a, b, 3);
        std::cout << "  special_A = " << vec_text(a.special) << ", special_B = " << vec_text(b.special) << "; " << obs.size()
                  << " candidates fail only the special-element clause\n";
        for (const auto& [kp, r] : obs) {
            std::cout << "  F = " << vec_text(kp.f[0]) << ", phi rows";
            for (const auto& row : kp.phi) std::cout << " " << vec_text(row);
            std::cout << ": " << r.violations[0].identity << " -- " << r.violations[0].detail << "\n";
        }
    }
    try {
        intertwine(t, t, IntertwineOptions{});
        reproduced = false;
    } catch (const Error& e) {
        std::cout << "intertwine: " << e.code() << "\n";
    }
    std::cout << (reproduced ? "PASS (negative control reproduced)" : "FAIL") << "\n";
    return reproduced ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"exact Z/p actions on finite-dimensional C*-algebras: invariants, lifts, intertwining certificates"};
    app.require_subcommand(1);
    app.add_option("--order", opt.order, "field order N (p, p^2 or 4p^2); overrides AFZP_ORDER");
    app.add_option("--bound", opt.bound, "entry bound for K-pair search")->check(CLI::Range(1, 50));
    app.add_option("--depth", opt.depth, "intertwining depth")->check(CLI::Range(1, 20));
    app.add_option("--jobs", opt.jobs, "worker threads for batch inputs")->check(CLI::Range(1, 256));
    app.add_option("--format", opt.format, "output format")->check(CLI::IsMember({"json", "text"}));
    app.add_option("--out", opt.out, "output path (written atomically); default stdout");
    app.fallthrough();

    std::vector<std::string> files;
    std::string f1, f2, f3, pairs_file, name, kind;
    int p = 2, stages = 4;

    auto* v = app.add_subcommand("validate", "check a system, hom or tower");
    v->add_option("files", files, "input documents")->required();
    auto* c = app.add_subcommand("canon", "canonical form of a system");
    c->add_option("files", files)->required();
    auto* x = app.add_subcommand("crossed", "crossed product presentation");
    x->add_option("files", files)->required();
    auto* k = app.add_subcommand("kinv", "K-theoretic invariant");
    k->add_option("files", files)->required();
    auto* ind = app.add_subcommand("induced", "K-pair induced by a hom");
    ind->add_option("hom", f1)->required();
    auto* cp = app.add_subcommand("checkpair", "check a K-pair against two invariants");
    cp->add_option("pair", f1)->required();
    cp->add_option("source", f2, "kinvariant, system or canonical")->required();
    cp->add_option("target", f3)->required();
    auto* li = app.add_subcommand("lift", "equivariant hom realizing a K-pair");
    li->add_option("pair", f1)->required();
    li->add_option("source", f2)->required();
    li->add_option("target", f3)->required();
    auto* ks = app.add_subcommand("ksearch", "all K-pairs within --bound");
    ks->add_option("source", f1)->required();
    ks->add_option("target", f2)->required();
    auto* eq = app.add_subcommand("equiv", "fixed unitary W with Ad W o h2 = h1");
    eq->add_option("hom1", f1)->required();
    eq->add_option("hom2", f2)->required();
    auto* it = app.add_subcommand("intertwine", "intertwining certificate for two towers");
    it->add_option("towerA", f1)->required();
    it->add_option("towerB", f2)->required();
    it->add_option("--pairs", pairs_file, "forward K-pairs psi_r : A_r -> B_r");
    auto* ve = app.add_subcommand("verify", "replay every identity of a certificate");
    ve->add_option("certificate", f1)->required();
    auto* tw = app.add_subcommand("tower", "write one of the built-in towers");
    tw->add_option("kind", kind)->required()->check(CLI::IsMember({"product", "sorted", "naive"}));
    tw->add_option("--p", p)->check(CLI::IsMember({2, 3, 5, 7}));
    tw->add_option("--stages", stages)->check(CLI::Range(1, 8));
    auto* de = app.add_subcommand("demo", "product-tower-p2 | product-tower-p3 | phillips-naive");
    de->add_option("name", name)->required()->check(CLI::IsMember({"product-tower-p2", "product-tower-p3", "phillips-naive"}));

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (opt.order) p_from_order(*opt.order);
        if (v->parsed()) return run_batch(files, do_validate);
        if (c->parsed()) return run_batch(files, do_canon);
        if (x->parsed()) return run_batch(files, do_crossed);
        if (k->parsed()) return run_batch(files, do_kinv);
        if (ind->parsed()) {
            emit(to_json(induced_map(read_hom(f1))));
            return 0;
        }
        if (cp->parsed()) {
            json j = load_file(f1);
            if (type_of(j) != "kpair") throw Error(ErrorCode::ParseError, f1 + ": expected a kpair document");
            return emit_report(check_pair(kpair_from_json(j, f1), read_invariant(f2), read_invariant(f3)));
        }
        if (li->parsed()) {
            json j = load_file(f1);
            if (type_of(j) != "kpair") throw Error(ErrorCode::ParseError, f1 + ": expected a kpair document");
            emit(to_json(lift(kpair_from_json(j, f1), read_canonical(f2), read_canonical(f3))));
            return 0;
        }
        if (ks->parsed()) {
            json out = json{{"afzp_format", kFormatVersion}, {"type", "kpairs"}, {"pairs", json::array()}};
            for (const auto& kp : ksearch(read_invariant(f1), read_invariant(f2), opt.bound)) {
                json e = to_json(kp);
                e.erase("afzp_format");
                out["pairs"].push_back(e);
            }
            emit(out);
            return 0;
        }
        if (eq->parsed()) {
            EqHom h1 = read_hom(f1), h2 = read_hom(f2);
            emit(to_json(equiv_unitary(h1, h2), *h1.target->ctx));
            return 0;
        }
        if (it->parsed()) {
            IntertwineOptions o;
            o.depth = opt.depth;
            o.bound = opt.bound;
            if (!pairs_file.empty()) o.pairs = read_pairs(pairs_file);
            emit(to_json(intertwine(read_tower(f1), read_tower(f2), o)));
            return 0;
        }
        if (ve->parsed()) {
            json j = load_file(f1);
            if (type_of(j) != "certificate") throw Error(ErrorCode::ParseError, f1 + ": expected a certificate document");
            return emit_report(verify(certificate_from_json(j, f1)));
        }
        if (tw->parsed()) {
            const FieldContext& f = opt.order ? FieldContext::get(p, *opt.order) : FieldContext::default_for(p);
            Tower t = kind == "product" ? product_tower(f, stages) : kind == "sorted" ? sorted_product_tower(f, stages) : naive_tower(f, stages);
            emit(to_json(t));
            return 0;
        }
        if (de->parsed()) {
            if (name == "product-tower-p2") return demo_product(2, 4);
            if (name == "product-tower-p3") return demo_product(3, 3);
            return demo_naive();
        }
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_code_for(e);
    } catch (const nlohmann::json::exception& e) {
        std::cerr << "error: ParseError: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 2;
}
