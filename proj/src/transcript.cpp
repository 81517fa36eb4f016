#include "prt/transcript.hpp"

#include <ostream>
#include <sstream>

#include "prt/commitment.hpp"
#include "prt/steplog.hpp"

namespace prt {

using json = nlohmann::ordered_json;

void transcript::add(const json &event) {
    m_lines.push_back(event.dump());
}

std::string transcript::text() const {
    std::string out;
    for (const auto &l : m_lines) {
        out += l;
        out += '\n';
    }
    return out;
}

void transcript::write(std::ostream &out) const {
    for (const auto &l : m_lines) {
        out << l << '\n';
    }
}

namespace {

hash need_hash(const json &j) {
    auto h = hash_from_hex(j.get<std::string>());
    if (!h) {
        throw std::runtime_error{"bad hash"};
    }
    return *h;
}

proof_bundle need_bundle(const json &j) {
    proof_bundle b;
    b.index = j.at("index").get<std::uint64_t>();
    b.leaf = need_hash(j.at("leaf"));
    for (const auto &s : j.at("siblings")) {
        b.siblings.push_back(need_hash(s));
    }
    return b;
}

} // namespace

std::vector<std::string> verify_transcript(const std::vector<std::string> &lines) {
    std::vector<std::string> problems;
    std::size_t accepted_claims = 0;
    std::vector<hash> claims;
    for (std::size_t i = 0; i < lines.size(); ++i) {
        const auto where = "line " + std::to_string(i + 1) + ": ";
        try {
            const auto e = json::parse(lines[i]);
            const auto kind = e.at("event").get<std::string>();
            const bool accepted = e.value("status", "") == "accepted";
            if (kind == "commit") {
                const auto root = need_hash(e.at("root"));
                const bool ok = need_bundle(e.at("first")).verifies(root) && need_bundle(e.at("last")).verifies(root);
                if (accepted && !ok) {
                    problems.push_back(where + "accepted commitment with a bad proof");
                }
            } else if (kind == "team") {
                claims.push_back(need_hash(e.at("claim")));
            } else if (kind == "children" && e.contains("left")) {
                const bool ok = hash_pair(need_hash(e.at("left")), need_hash(e.at("right"))) == need_hash(e.at("parent"));
                if (ok != accepted) {
                    problems.push_back(where + "children reveal status disagrees with its labels");
                }
            } else if (kind == "leaf" && e.contains("bundle")) {
                const auto b = need_bundle(e.at("bundle"));
                const bool ok = b.index == e.at("index").get<std::uint64_t>() && b.verifies(need_hash(e.at("root")));
                if (accepted && !ok) {
                    problems.push_back(where + "accepted leaf proof does not verify");
                }
            } else if (kind == "log") {
                auto data = bytes_from_hex(e.at("log").get<std::string>());
                auto log = data ? decode_log(*data) : std::nullopt;
                bool ok = false;
                if (log && !e.at("claim").get<std::string>().empty()) {
                    auto r = step_hash(need_hash(e.at("n")), *log);
                    ok = r.accepted() && *r.root == need_hash(e.at("claim"));
                }
                if (ok != accepted) {
                    problems.push_back(where + "log verdict does not replay");
                }
            } else if (kind == "result") {
                const auto fh = e.at("final_hash").get<std::string>();
                if (e.at("outcome") == "NO_CLAIM") {
                    if (!fh.empty()) {
                        problems.push_back(where + "NO_CLAIM with a final hash");
                    }
                } else if (fh.empty()) {
                    problems.push_back(where + "result without a final hash");
                } else if (!claims.empty()) {
                    const auto h = need_hash(e.at("final_hash"));
                    bool found = false;
                    for (const auto &c : claims) {
                        found |= c == h;
                    }
                    if (!found) {
                        problems.push_back(where + "final hash was never claimed by a team");
                    }
                }
                ++accepted_claims;
            }
        } catch (const std::exception &ex) {
            problems.push_back(where + "malformed record (" + ex.what() + ")");
        }
    }
    if (accepted_claims != 1) {
        problems.push_back("expected exactly one result record, found " + std::to_string(accepted_claims));
    }
    return problems;
}

} // namespace prt
