#pragma once

#include <iosfwd>
#include <string>

#include "ihp/case.hpp"
#include "ihp/chance_check.hpp"
#include "ihp/day_ahead.hpp"
#include "ihp/real_time.hpp"

namespace ihp {

void write_schedule_csv(const CommunityCase& c, const DayAheadResult& r, std::ostream& os);
void write_summary_json(const CommunityCase& c, const DayAheadResult& r,
                        const ChanceCheckReport* chance, double runtime_s, std::ostream& os);
void write_rt_csv(const CommunityCase& c, const RtDispatch& rt, std::ostream& os);
void write_rt_summary_json(const CommunityCase& c, const RtDispatch& rt, std::uint64_t seed,
                           std::ostream& os);

}  // namespace ihp
