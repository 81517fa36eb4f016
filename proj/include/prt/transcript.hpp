#pragma once

/// \file
/// \brief Line-delimited JSON record of a dispute
///
/// Each protocol event becomes one JSON object per line. Revealed labels,
/// proofs and logs are recorded in full so the checks the referee made can be
/// repeated offline by verify_transcript.

#include <iosfwd>
#include <string>
#include <vector>

#include "json.hpp"

namespace prt {

class transcript {
public:
    void add(const nlohmann::ordered_json &event);

    const std::vector<std::string> &lines() const noexcept {
        return m_lines;
    }

    std::string text() const;
    void write(std::ostream &out) const;

private:
    std::vector<std::string> m_lines;
};

/// Re-checks every recorded reveal, proof and log against the recorded
/// labels. Returns human-readable problems; empty means the transcript holds up.
std::vector<std::string> verify_transcript(const std::vector<std::string> &lines);

} // namespace prt
