from __future__ import annotations

from enum import Enum

CRITERION_IDS = (
    "ABDOMINAL",
    "ADVANCED-CAD",
    "ALCOHOL-ABUSE",
    "ASP-FOR-MI",
    "CREATININE",
    "DIETSUPP-2MOS",
    "DRUG-ABUSE",
    "ENGLISH",
    "HBA1C",
    "KETO-1YR",
    "MAJOR-DIABETES",
    "MAKES-DECISIONS",
    "MI-6MOS",
)


class Label(str, Enum):
    MET = "met"
    NOT_MET = "not met"

    @classmethod
    def parse(cls, text: str) -> Label:
        try:
            return cls(text.strip().lower())
        except ValueError:
            raise ValueError(f"unknown label {text!r}; expected 'met' or 'not met'") from None

    def flip(self) -> Label:
        return Label.NOT_MET if self is Label.MET else Label.MET

    def __str__(self) -> str:
        return self.value
