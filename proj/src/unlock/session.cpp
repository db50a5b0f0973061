#include "courseforge/unlock/session.hpp"

#include <charconv>
#include <istream>
#include <ostream>

#include "courseforge/common/digest.hpp"
#include "courseforge/common/error.hpp"
#include "courseforge/common/rng.hpp"
#include "courseforge/testkit/normalize.hpp"

namespace courseforge::unlock {

void StreamIo::present(const UnlockPrompt& prompt) {
  multiple_choice_ = !prompt.choices.empty();
  out_ << "--- " << prompt.question_id << " > " << prompt.case_id << " ---\n" << prompt.prompt << "\n";
  for (std::size_t i = 0; i < prompt.choices.size(); ++i) {
    out_ << "  " << (i + 1) << ") " << prompt.choices[i] << "\n";
  }
  out_ << (multiple_choice_ ? "Choose one (number or text):" : "What is the output? (end with an empty line)")
       << std::endl;
}

std::optional<std::string> StreamIo::read_answer() {
  out_ << "? " << std::flush;
  std::string line;
  if (multiple_choice_) {
    if (!std::getline(in_, line)) return std::nullopt;
    return line;
  }
  std::string answer;
  bool any = false;
  while (std::getline(in_, line)) {
    if (line.empty() || line == "\r") return answer;
    if (any) answer.push_back('\n');
    answer += line;
    any = true;
  }
  if (!any) return std::nullopt;
  return answer;
}

void StreamIo::feedback(bool correct) {
  out_ << (correct ? "-- OK! --" : "-- Not quite. Try again! --") << std::endl;
}

std::vector<std::string> shuffle_choices(const testkit::TestCase& test_case,
                                         std::string_view assignment_id,
                                         std::string_view student_id) {
  if (!test_case.choices || test_case.choices->empty()) {
    throw user_error("choices", "case '" + test_case.id + "' has no choices");
  }
  Sha256 h;
  h.update_length(assignment_id.size()).update(assignment_id);
  h.update_length(test_case.id.size()).update(test_case.id);
  h.update_length(student_id.size()).update(student_id);
  auto digest = h.finish();
  std::uint64_t seed = 0;
  for (int i = 0; i < 8; ++i) seed = seed << 8 | digest[static_cast<std::size_t>(i)];

  std::vector<std::string> order = *test_case.choices;
  SeededRng(seed).shuffle(order);
  return order;
}

namespace {

// "3" selects the third displayed choice; anything else is taken verbatim.
std::string resolve_choice(const std::string& raw, const std::vector<std::string>& shown) {
  if (shown.empty()) return raw;
  auto lines = testkit::normalize_output(raw);
  if (lines.size() != 1) return raw;
  const std::string& s = lines[0];
  std::size_t begin = s.find_first_not_of(' ');
  if (begin == std::string::npos) return raw;
  std::size_t index = 0;
  auto [ptr, ec] = std::from_chars(s.data() + begin, s.data() + s.size(), index);
  if (ec == std::errc() && ptr == s.data() + s.size() && index >= 1 && index <= shown.size()) {
    return shown[index - 1];
  }
  return raw;
}

}  // namespace

UnlockState unlock_session(const UnlockVault& vault, const testkit::TestSpec& spec,
                           UnlockState state, UnlockIo& io, const SessionContext& context) {
  if (vault.assignment_id != spec.assignment_id) {
    throw user_error("vault", "vault is for '" + vault.assignment_id + "', spec is for '" +
                                  spec.assignment_id + "'");
  }
  for (const auto& q : spec.questions) {
    for (const auto& c : q.cases) {
      if (!c.locked) continue;
      std::string key = testkit::case_key(q.id, c.id);
      if (state.is_unlocked(key)) continue;
      vault.entry(key);  // unknown key -> error before prompting

      UnlockPrompt prompt{q.id, c.id, c.prompt, {}};
      if (c.choices) prompt.choices = shuffle_choices(c, spec.assignment_id, context.student_id);
      io.present(prompt);

      while (true) {
        auto raw = io.read_answer();
        if (!raw) return state;
        std::string answer = resolve_choice(*raw, prompt.choices);
        auto lines = testkit::normalize_output(answer);
        bool correct = verify_attempt(vault, key, lines);
        state.record_attempt(key);
        if (context.on_event) {
          telemetry::AttemptEvent e;
          e.student_id = context.student_id;
          e.assignment_id = spec.assignment_id;
          e.question_id = q.id;
          e.timestamp = context.clock ? context.clock() : 0;
          e.payload = telemetry::UnlockPayload{state.attempts(key), key, correct};
          context.on_event(e);
        }
        io.feedback(correct);
        if (correct) {
          state.mark_unlocked(key, std::move(lines));
          break;
        }
      }
    }
  }
  return state;
}

}  // namespace courseforge::unlock
