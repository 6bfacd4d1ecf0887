#include "phmkit/dmatrix.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "json.hpp"
#include "phmkit/errors.hpp"

namespace phmkit {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream is(line);
    while (std::getline(is, cell, ',')) cells.push_back(trim(cell));
    if (!line.empty() && line.back() == ',') cells.push_back("");
    return cells;
}

std::vector<std::string> nonempty_lines(const std::string& text, std::vector<std::size_t>* line_nos) {
    std::vector<std::string> out;
    std::istringstream is(text);
    std::string line;
    std::size_t no = 0;
    while (std::getline(is, line)) {
        ++no;
        if (trim(line).empty()) continue;
        out.push_back(line);
        if (line_nos) line_nos->push_back(no);
    }
    return out;
}

double parse_number(const std::string& cell, const std::string& what, std::size_t line_no) {
    try {
        std::size_t used = 0;
        const double v = std::stod(cell, &used);
        if (used != cell.size()) throw std::invalid_argument(cell);
        return v;
    } catch (const std::exception&) {
        std::ostringstream os;
        os << "cannot parse " << what << " '" << cell << "' (line " << line_no << ")";
        throw parse_error(os.str());
    }
}

}  // namespace

DMatrix parse_dmatrix(const std::string& csv_text) {
    std::vector<std::size_t> line_nos;
    const auto lines = nonempty_lines(csv_text, &line_nos);
    if (lines.size() < 2) throw parse_error("D-matrix needs a header row and at least one fault row");

    DMatrix out;
    const auto header = split_csv_line(lines[0]);
    if (header.size() < 2) throw parse_error("D-matrix header has no test columns");
    for (std::size_t j = 1; j < header.size(); ++j) {
        if (header[j].empty()) throw parse_error("empty test id in header");
        out.test_ids.push_back(header[j]);
    }

    const std::size_t n = out.test_ids.size();
    for (std::size_t r = 1; r < lines.size(); ++r) {
        const auto cells = split_csv_line(lines[r]);
        if (cells.size() != n + 1) {
            std::ostringstream os;
            os << "ragged row: " << cells.size() << " cells, expected " << n + 1 << " (line "
               << line_nos[r] << ")";
            throw parse_error(os.str());
        }
        if (cells[0].empty()) throw parse_error("empty fault id (line " + std::to_string(line_nos[r]) + ")");
        out.fault_ids.push_back(cells[0]);
        for (std::size_t j = 1; j < cells.size(); ++j) {
            if (cells[j] != "0" && cells[j] != "1") {
                std::ostringstream os;
                os << "non-binary entry at row " << cells[0] << ", col " << out.test_ids[j - 1]
                   << " (line " << line_nos[r] << ")";
                throw parse_error(os.str());
            }
            out.d.push_back(cells[j] == "1" ? 1 : 0);
        }
    }

    std::set<std::string> seen;
    for (const auto& id : out.fault_ids)
        if (!seen.insert(id).second) throw parse_error("duplicate fault id " + id);
    for (const auto& id : out.test_ids)
        if (!seen.insert(id).second) throw parse_error("duplicate id " + id);

    for (std::size_t i = 0; i < out.fault_ids.size(); ++i) {
        bool any = false;
        for (std::size_t j = 0; j < n; ++j) any = any || out.at(i, j);
        if (!any) out.warnings.push_back("isolated fault " + out.fault_ids[i] + ": no test detects it");
    }
    for (std::size_t j = 0; j < n; ++j) {
        bool any = false;
        for (std::size_t i = 0; i < out.fault_ids.size(); ++i) any = any || out.at(i, j);
        if (!any) out.warnings.push_back("isolated test " + out.test_ids[j] + ": detects no fault");
    }
    return out;
}

std::vector<FaultReliability> parse_reliability_csv(const std::string& csv_text) {
    std::vector<std::size_t> line_nos;
    const auto lines = nonempty_lines(csv_text, &line_nos);
    if (lines.empty()) throw parse_error("reliability table is empty");
    const auto header = split_csv_line(lines[0]);
    const std::vector<std::string> expected{"id", "name", "mtbf", "mttr", "repair_cost"};
    if (header != expected)
        throw parse_error("reliability header must be id,name,mtbf,mttr,repair_cost");

    std::vector<FaultReliability> out;
    std::set<std::string> seen;
    for (std::size_t r = 1; r < lines.size(); ++r) {
        const auto cells = split_csv_line(lines[r]);
        if (cells.size() != 5)
            throw parse_error("ragged reliability row (line " + std::to_string(line_nos[r]) + ")");
        FaultReliability rec;
        rec.id = cells[0];
        rec.name = cells[1];
        rec.mtbf = parse_number(cells[2], "mtbf", line_nos[r]);
        rec.mttr = parse_number(cells[3], "mttr", line_nos[r]);
        rec.repair_cost = parse_number(cells[4], "repair_cost", line_nos[r]);
        if (rec.id.empty() || !seen.insert(rec.id).second)
            throw parse_error("missing or duplicate reliability id (line " +
                              std::to_string(line_nos[r]) + ")");
        if (!(rec.mtbf > 0.0))
            throw parse_error("mtbf must be > 0 for " + rec.id);
        if (rec.mttr < 0.0 || rec.repair_cost < 0.0)
            throw parse_error("mttr and repair_cost must be >= 0 for " + rec.id);
        out.push_back(std::move(rec));
    }
    return out;
}

std::vector<TestParams> parse_test_params_json(const std::string& json_text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::exception& e) {
        throw parse_error(std::string("test params JSON: ") + e.what());
    }
    if (!doc.is_array()) throw parse_error("test params JSON must be an array");
    std::vector<TestParams> out;
    for (const auto& item : doc) {
        TestParams p;
        p.id = item.at("id").get<std::string>();
        p.fa = item.at("fa").get<double>();
        p.nd = item.at("nd").get<double>();
        if (item.contains("per_pair"))
            for (const auto& [fid, pair] : item.at("per_pair").items())
                p.per_pair[fid] = {pair.at("fa").get<double>(), pair.at("nd").get<double>()};
        out.push_back(std::move(p));
    }
    return out;
}

CtbnModel derive_dmatrix_structure(const DMatrix& d) {
    CtbnModel m;
    for (const auto& f : d.fault_ids) m.variables.push_back({f, {"0", "1"}, VariableKind::fault});
    for (const auto& t : d.test_ids) m.variables.push_back({t, {"0", "1"}, VariableKind::test});
    for (std::size_t i = 0; i < d.fault_ids.size(); ++i)
        for (std::size_t j = 0; j < d.test_ids.size(); ++j)
            if (d.at(i, j)) m.edges.insert({d.fault_ids[i], d.test_ids[j]});
    m.canonicalize();
    return m;
}

Cim fault_cim(const FaultReliability& r) {
    if (!(r.mtbf > 0.0) || !std::isfinite(r.mtbf)) throw parameter_error("mtbf must be > 0 for " + r.id);
    if (r.mttr < 0.0 || !std::isfinite(r.mttr)) throw parameter_error("mttr must be >= 0 for " + r.id);
    Cim cim;
    cim.owner = r.id;
    cim.matrices.push_back(two_state_im(1.0 / r.mtbf, r.mttr > 0.0 ? 1.0 / r.mttr : 0.0));
    return cim;
}

namespace {

// P(the per-pair detectors all report clear | parent fault states).
double all_clear_probability(const TestParams& p, const std::map<std::string, int>& parent_states) {
    double prod = 1.0;
    for (const auto& [fault, state] : parent_states) {
        PairParams pair;
        if (auto it = p.per_pair.find(fault); it != p.per_pair.end()) pair = it->second;
        prod *= state == 0 ? (1.0 - pair.fa) : pair.nd;
    }
    return prod;
}

}  // namespace

double test_pass_probability(const TestParams& p,
                             const std::map<std::string, int>& parent_states) {
    const double p1 = all_clear_probability(p, parent_states);
    return p.nd * p1 + (1.0 - p.fa) * (1.0 - p1);
}

Cim test_cim(const TestParams& p, const std::vector<std::string>& parents, TestCimMode mode) {
    if (p.fa < 0.0 || p.fa > 1.0 || p.nd < 0.0 || p.nd > 1.0)
        throw parameter_error("fa and nd must lie in [0,1] for " + p.id);
    if (mode == TestCimMode::simplified &&
        (p.fa <= 0.0 || p.fa >= 1.0 || p.nd <= 0.0 || p.nd >= 1.0))
        throw parameter_error("simplified mode needs 0 < fa < 1 and 0 < nd < 1 for " + p.id +
                              "; use per_pair mode, which clamps");
    for (const auto& [fault, pair] : p.per_pair) {
        if (std::find(parents.begin(), parents.end(), fault) == parents.end())
            throw parameter_error("per-pair entry for " + fault + " is not a parent of " + p.id);
        if (pair.fa < 0.0 || pair.fa > 1.0 || pair.nd < 0.0 || pair.nd > 1.0)
            throw parameter_error("per-pair values out of [0,1] for " + p.id + "/" + fault);
    }

    Cim cim;
    cim.owner = p.id;
    cim.parent_ids = parents;
    std::sort(cim.parent_ids.begin(), cim.parent_ids.end());

    const std::size_t n_assignments = std::size_t(1) << cim.parent_ids.size();
    cim.matrices.reserve(n_assignments);
    for (std::size_t a = 0; a < n_assignments; ++a) {
        double pass, fail;
        if (mode == TestCimMode::simplified) {
            const bool any_fault = a != 0;
            pass = any_fault ? p.nd : 1.0 - p.fa;
            fail = any_fault ? 1.0 - p.nd : p.fa;
        } else {
            std::map<std::string, int> states;
            for (std::size_t i = 0; i < cim.parent_ids.size(); ++i)
                states[cim.parent_ids[i]] = static_cast<int>(a >> i & 1);
            const double p1 = all_clear_probability(p, states);
            // Pass/fail computed as separate mixes (not via 1-pass) so the
            // zero-pair case lands on the simplified rates bit for bit.
            pass = (1.0 - p.fa) * p1 + p.nd * (1.0 - p1);
            fail = p.fa * p1 + (1.0 - p.nd) * (1.0 - p1);
            if (pass < 1e-6) {
                pass = 1e-6;
                fail = 1.0 - 1e-6;
            } else if (pass > 1.0 - 1e-6) {
                pass = 1.0 - 1e-6;
                fail = 1e-6;
            }
        }
        cim.matrices.push_back(two_state_im(1.0 / pass, 1.0 / fail));
    }
    return cim;
}

CtbnModel build_diagnostic_model(const DMatrix& d,
                                 const std::vector<FaultReliability>& reliability,
                                 const std::vector<TestParams>& tests, TestCimMode mode) {
    if (d.fault_ids.empty()) throw data_error("no faults in the D-matrix");

    CtbnModel m = derive_dmatrix_structure(d);

    std::map<std::string, const FaultReliability*> rel;
    for (const auto& r : reliability) rel.emplace(r.id, &r);
    std::map<std::string, const TestParams*> par;
    for (const auto& t : tests) par.emplace(t.id, &t);

    std::vector<std::string> missing;
    for (const auto& f : d.fault_ids)
        if (!rel.count(f)) missing.push_back(f);
    for (const auto& t : d.test_ids)
        if (!par.count(t)) missing.push_back(t);
    if (!missing.empty()) {
        std::string msg = "missing parameter records for:";
        for (const auto& id : missing) msg += " " + id;
        throw data_error(msg);
    }

    for (std::size_t i = 0; i < d.fault_ids.size(); ++i) {
        m.cims.emplace(d.fault_ids[i], fault_cim(*rel.at(d.fault_ids[i])));
        m.initial.emplace(d.fault_ids[i], std::vector<double>{1.0, 0.0});
    }
    for (std::size_t j = 0; j < d.test_ids.size(); ++j) {
        std::vector<std::string> parents;
        for (std::size_t i = 0; i < d.fault_ids.size(); ++i)
            if (d.at(i, j)) parents.push_back(d.fault_ids[i]);
        m.cims.emplace(d.test_ids[j], test_cim(*par.at(d.test_ids[j]), parents, mode));
        m.initial.emplace(d.test_ids[j], std::vector<double>{1.0, 0.0});
    }

    const auto report = validate_model(m);
    if (!report.empty())
        throw data_error("derived model failed validation: " + report.front().variable + ": " +
                         report.front().description);
    return m;
}

}  // namespace phmkit
