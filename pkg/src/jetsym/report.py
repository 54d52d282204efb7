"""Run reports: structured verdicts with text and JSON renderings.

Reports are deterministic: no timestamps, stable ordering, seeds echoed in
hex, so identical problem + seed gives a byte-identical machine rendering.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field

AFFIRMATIVE = {"Zero", "Yes", "ok"}
NEGATIVE = {"NonZero", "No", "unsatisfiable", "failed"}


@dataclass
class Row:
    name: str
    verdict: str
    justification: str = ""
    confidence: str = ""
    detail: str = ""


@dataclass
class Report:
    command: str
    problem: str
    options: dict = field(default_factory=dict)
    verdicts: list = field(default_factory=list)
    equations: list = field(default_factory=list)
    assumptions: list = field(default_factory=list)
    notes: list = field(default_factory=list)
    solution: dict = field(default_factory=dict)

    def add(self, name, verdict, justification="", confidence="", detail=""):
        self.verdicts.append(Row(name, str(verdict), justification, confidence, detail))

    def exit_code(self):
        """0 all affirmative/Zero, 1 any negative, 2 any Unknown."""
        states = {r.verdict for r in self.verdicts}
        if states & NEGATIVE:
            return 1
        if "Unknown" in states:
            return 2
        return 0

    def to_dict(self):
        return {
            "command": self.command,
            "problem": self.problem,
            "options": dict(sorted(self.options.items())),
            "verdicts": [asdict(r) for r in self.verdicts],
            "equations": list(self.equations),
            "assumptions": list(self.assumptions),
            "notes": list(self.notes),
            "solution": dict(sorted(self.solution.items())),
            "exit_code": self.exit_code(),
        }

    def to_json(self):
        return json.dumps(self.to_dict(), sort_keys=True, indent=2) + "\n"

    @classmethod
    def from_json(cls, text):
        data = json.loads(text)
        report = cls(command=data["command"], problem=data["problem"],
                     options=data["options"],
                     equations=data["equations"], assumptions=data["assumptions"],
                     notes=data["notes"], solution=data["solution"])
        for r in data["verdicts"]:
            report.add(r["name"], r["verdict"], r["justification"],
                       r["confidence"], r["detail"])
        return report

    def to_text(self):
        lines = [f"jetsym {self.command}: {self.problem}"]
        for key, value in sorted(self.options.items()):
            lines.append(f"  option {key} = {value}")
        if self.verdicts:
            lines.append("verdicts:")
            for r in self.verdicts:
                extra = []
                if r.confidence:
                    extra.append(r.confidence)
                if r.justification:
                    extra.append(r.justification)
                tail = f"  ({'; '.join(extra)})" if extra else ""
                lines.append(f"  [{r.verdict}] {r.name}{tail}")
                if r.detail:
                    lines.append(f"      {r.detail}")
        if self.equations:
            lines.append(f"equations ({len(self.equations)}):")
            for e in self.equations:
                lines.append(f"  {e}")
        if self.solution:
            lines.append("solution:")
            for key, value in sorted(self.solution.items()):
                lines.append(f"  {key} = {value}")
        if self.assumptions:
            lines.append("assumptions:")
            for a in self.assumptions:
                lines.append(f"  - {a}")
        if self.notes:
            lines.append("notes:")
            for n in self.notes:
                lines.append(f"  - {n}")
        lines.append(f"exit: {self.exit_code()}")
        return "\n".join(lines) + "\n"
