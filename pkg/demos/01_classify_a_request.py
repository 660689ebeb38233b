"""
Turning a free-text request into a task code
============================================

Every conversion starts with a sentence like "read this article to me".
The interpreter layer maps that sentence onto one of ten task codes and
reports, honestly, when it could not.
"""

from modalconv.core import SUPPORTED_TASKS, TASK_DESCRIPTIONS, TaskType, parse_task_label
from modalconv.interpreter import classify, failure_rate, make_fixed_backend, make_keyword_backend

# The ten codes. Seven have a working conversion pipeline behind them; TTV
# and ATV are recognized but declined, and UNK absorbs everything else.
for task in TaskType:
    marker = "*" if task in SUPPORTED_TASKS else " "
    print(f" {marker} {task.value}: {TASK_DESCRIPTIONS[task]}")

# Labels arrive as raw strings from models or datasets. Parsing is strict
# apart from whitespace and case.
print(parse_task_label("  tts \n"))

# The simplest real backend scores keyword hits. Ship your own phrases or
# use the defaults from the command-line config.
backend = make_keyword_backend(
    {
        TaskType.TTS: ("read aloud", "narrate"),
        TaskType.STT: ("transcribe",),
        TaskType.ITT: ("caption",),
    }
)

for prompt in (
    "please narrate chapter one",
    "transcribe tuesday's standup recording",
    "make me a sandwich",
):
    outcome = classify(backend, prompt)
    label = outcome.parsed.value if outcome.parsed else "failed"
    print(f"{prompt!r:45} -> {label}")

# Backends that answer with junk do not raise; the outcome records the
# failure and the aggregate failure rate stays exact.
flaky = make_fixed_backend("sorry, I don't know that one", name="flaky")
outcomes = [classify(flaky, "anything") for _ in range(4)]
outcomes += [classify(backend, "narrate it") for _ in range(6)]
print("failure rate:", failure_rate(outcomes))  # 4/10 exactly
