"""
Driving a conversation turn by turn
===================================

The session layer is what the command-line REPL wraps: a small state
machine that asks for a task, then a file, then reports where the output
landed. Here we drive it directly, so every system reply is visible and
the script needs no terminal input.
"""

import tempfile
from pathlib import Path

from modalconv.evalharness import fixture_keyword_rules
from modalconv.experts import StubBackend
from modalconv.interpreter import make_keyword_backend
from modalconv.orchestrator import default_registry, new_session, step

out_dir = Path(tempfile.mkdtemp(prefix="session-demo-"))
story = out_dir / "story.txt"
story.write_text("the lighthouse keeper and the literate parrot\n")

interpreter = make_keyword_backend(fixture_keyword_rules())
registry = default_registry()
backend = StubBackend()

session = new_session(out_dir, unk_menu_limit=2)

# A realistic exchange: one misfire, one unsupported request, a wrong file,
# then success. The session never raises at the user; every fault comes
# back as the next thing to say.
script = [
    "do the thing with the stuff",          # unclassifiable
    "animate my story as a video",          # TTV: recognized, declined
    "please narrate my story out loud",     # TTS, now asked for a file
    str(out_dir / "missing.txt"),           # no such file
    str(story),                             # finally
]

for message in script:
    session, reply = step(session, message, interpreter, registry, backend)
    print(f">>> {message}")
    print(reply)
    print()

print("final state:", session.state.name)

# The transcript alternates strictly user/system, which is what the
# evaluation tooling consumes.
roles = [role for role, _ in session.transcript]
assert roles == ["user", "system"] * len(script)

# Paste-the-text-directly also works for text-input tasks: anything that
# does not look like a path is written to a scratch file and converted.
session2 = new_session(out_dir)
session2, _ = step(session2, "narrate this please", interpreter, registry, backend)
session2, reply = step(session2, "once upon a tide...", interpreter, registry, backend)
print(reply)
