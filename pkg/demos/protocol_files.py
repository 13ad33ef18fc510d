"""Protocols as text: the .qcp language, its checks and its error messages.

Run from the repository root so the corpus path resolves.
"""

from pathlib import Path

from eacomm import dsl
from eacomm.model import success_probability

text = Path("tests/corpus/superdense_m2.qcp").read_text()
p = dsl.load(text)
print(text)
print(f"m_A={p.m_A}, success {success_probability(p):.6f}")
print("printing again reproduces the file:", dsl.format_protocol(p) == text)

broken = [
    "protocol p { n 1; epr 1; alice { send [ea[0]] } outputs [eb[0]]; }",
    "protocol p { n 1; epr 1; bob { if x[0] apply X on [eb[0]]; } outputs [eb[0]]; }",
    "protocol p { n 0; schmidt [0.5, 0.4]; outputs []; }",
    "protocol p { n 1; epr 1; alice { apply X on [eb[0]]; } outputs [eb[0]]; }",
]
print()
for src in broken:
    try:
        dsl.load(src)
    except (dsl.ParseError, dsl.ValidationError) as e:
        print(f"{type(e).__name__}: {e}")
