"""
Routing a task to its expert and running the conversion
=======================================================

Each supported task owns exactly one expert: the accepted input extensions,
the stage chain, and the output extension. Backends are pluggable; the stub
backend used here produces tiny deterministic files, which keeps the demo
offline while exercising the real routing, staging, and naming logic.
"""

import tempfile
from pathlib import Path

from modalconv.core import FileArtifact, TaskType
from modalconv.experts import ConversionStage, StubBackend, convert, run_pipeline
from modalconv.orchestrator import default_registry, execute, route

# 1. The routing table. Multi-stage experts reuse single-stage ones: audio
#    to image is transcribe-then-illustrate, image to audio is
#    caption-then-narrate.
for spec in default_registry():
    chain = "+".join(s.value for s in spec.stages)
    exts = ",".join(sorted(spec.file_extensions))
    print(f"{spec.task.value}: [{exts}] --{chain}--> .{spec.output_extension}")

scratch = Path(tempfile.mkdtemp(prefix="convert-demo-"))
story = scratch / "story.txt"
story.write_text("a lighthouse keeper teaches her parrot to read\n")

# 2. One stage, directly. The contract checks run on both ends: the input
#    extension must match the stage's input kind and the backend must
#    actually produce a non-empty file.
stub = StubBackend()
wav = convert(stub, ConversionStage.TTS, FileArtifact.from_path(story), scratch / "story.wav")
print(f"\nTTS wrote {wav.path.name} ({wav.byte_size} bytes)")

# 3. A chain. Kinds must line up stage to stage; intermediates go to the
#    workdir and a failed stage cleans up after itself.
sketch = scratch / "sketch.png"
sketch.write_bytes(bytes.fromhex("89504e470d0a1a0a") + b"0" * 64)
png = run_pipeline(
    [ConversionStage.ITT, ConversionStage.TTI],
    FileArtifact.from_path(sketch),
    stub,
    scratch,
)
print(f"ITT+TTI produced {png.path.name}")

# 4. The full expert path: route the task, execute the chain, land the
#    output under the chosen directory with the stamped name.
out_dir = scratch / "out"
out_dir.mkdir()
spec = route(TaskType.ITA, default_registry())
out = execute(spec, FileArtifact.from_path(sketch), stub, out_dir)
print(f"ITA output: {out.path.relative_to(scratch)}")
print("stages invoked:", [s.value for s, _ in stub.calls][-2:])

# 5. Document inputs ride an extraction stage first. Handing a .pdf to the
#    narrator prepends TEXTX automatically inside execute(); the registry
#    entry itself stays single-stage.
fake_pdf = scratch / "report.pdf"
fake_pdf.write_bytes(b"%PDF-1.4 pretend")
spoken = execute(route(TaskType.TTS, default_registry()), FileArtifact.from_path(fake_pdf), stub, out_dir)
print(f"TTS on a pdf: {spoken.path.name}")
