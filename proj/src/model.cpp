#include "floc/model.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "floc/errors.hpp"

namespace floc {

namespace {

void check_subject(const SubjectRecord& s) {
    if (s.t.empty()) throw EmptyInput();
    if (s.t.size() != s.y.size())
        throw ConfigError("subject " + std::to_string(s.id) +
                          ": t and y lengths differ");
    for (std::size_t j = 0; j < s.t.size(); ++j) {
        if (!std::isfinite(s.t[j]) || !std::isfinite(s.y[j]))
            throw NonFiniteValue("subject " + std::to_string(s.id) +
                                 ": non-finite observation");
        if (s.t[j] < 0.0 || s.t[j] > 1.0) throw TOutOfRange(s.t[j]);
        if (j > 0 && s.t[j] < s.t[j - 1])
            throw ConfigError("subject " + std::to_string(s.id) +
                              ": t not sorted after validation");
    }
}

DesignKind infer_kind(const std::vector<SubjectRecord>& subjects) {
    const auto& first = subjects.front();
    for (const auto& s : subjects) {
        if (s.t.size() != first.t.size()) return DesignKind::Independent;
        for (std::size_t j = 0; j < s.t.size(); ++j)
            if (std::abs(s.t[j] - first.t[j]) > kDedupTol)
                return DesignKind::Independent;
    }
    return DesignKind::Common;
}

}  // namespace

ObservationSet ObservationSet::from_records(std::vector<SubjectRecord> records) {
    if (records.empty()) throw EmptyInput();
    std::sort(records.begin(), records.end(),
              [](const SubjectRecord& a, const SubjectRecord& b) { return a.id < b.id; });
    for (std::size_t i = 1; i < records.size(); ++i)
        if (records[i].id == records[i - 1].id)
            throw ConfigError("duplicate subject id " + std::to_string(records[i].id));
    for (auto& s : records) {
        // sort points by t, carrying y along
        std::vector<std::size_t> idx(s.t.size());
        for (std::size_t j = 0; j < idx.size(); ++j) idx[j] = j;
        std::stable_sort(idx.begin(), idx.end(),
                         [&](std::size_t a, std::size_t b) { return s.t[a] < s.t[b]; });
        std::vector<double> t(s.t.size()), y(s.y.size());
        for (std::size_t j = 0; j < idx.size(); ++j) {
            t[j] = s.t[idx[j]];
            y[j] = s.y[idx[j]];
        }
        s.t = std::move(t);
        s.y = std::move(y);
        check_subject(s);
    }
    ObservationSet out;
    out.subjects_ = std::move(records);
    out.total_ = 0;
    for (const auto& s : out.subjects_) out.total_ += s.t.size();
    out.kind_ = infer_kind(out.subjects_);
    return out;
}

ObservationSet validate(const std::vector<RawPoint>& raw) {
    if (raw.empty()) throw EmptyInput();
    std::map<long, SubjectRecord> by_id;
    for (const auto& p : raw) {
        auto& rec = by_id[p.subject];
        rec.id = p.subject;
        rec.t.push_back(p.t);
        rec.y.push_back(p.y);
    }
    std::vector<SubjectRecord> records;
    records.reserve(by_id.size());
    for (auto& [id, rec] : by_id) records.push_back(std::move(rec));
    return ObservationSet::from_records(std::move(records));
}

DesignSummary summarize(const ObservationSet& data, double dedup_tol) {
    DesignSummary out;
    out.n = data.n();

    bool all_equal = true;
    std::size_t m0 = data.subjects().front().t.size();
    double inv_sum = 0.0;
    for (const auto& s : data.subjects()) {
        if (s.t.size() != m0) all_equal = false;
        inv_sum += 1.0 / static_cast<double>(s.t.size());
    }
    out.m_harmonic = all_equal ? static_cast<double>(m0)
                               : static_cast<double>(out.n) / inv_sum;

    std::vector<double> pooled;
    pooled.reserve(data.total_points());
    for (const auto& s : data.subjects())
        pooled.insert(pooled.end(), s.t.begin(), s.t.end());
    std::sort(pooled.begin(), pooled.end());
    // keep the first representative of each near-duplicate group
    for (double t : pooled)
        if (out.unique_knots.empty() || t - out.unique_knots.back() > dedup_tol)
            out.unique_knots.push_back(t);

    out.a = out.unique_knots.front();
    out.b = out.unique_knots.back();
    return out;
}

}  // namespace floc
