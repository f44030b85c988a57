"""Debt labels and classification task ids."""

from enum import Enum


class SatdLabel(str, Enum):
    NON_SATD = "NON_SATD"
    CODE_DESIGN_DEBT = "CODE_DESIGN_DEBT"
    TEST_DEBT = "TEST_DEBT"
    DOCUMENTATION_DEBT = "DOCUMENTATION_DEBT"
    REQUIREMENT_DEBT = "REQUIREMENT_DEBT"


# Index order is the probability-vector order everywhere.
LABELS: tuple[SatdLabel, ...] = tuple(SatdLabel)
LABEL_INDEX: dict[SatdLabel, int] = {lab: i for i, lab in enumerate(LABELS)}
SATD_LABELS: tuple[SatdLabel, ...] = tuple(
    lab for lab in LABELS if lab is not SatdLabel.NON_SATD)
NUM_LABELS = len(LABELS)


class TaskId(str, Enum):
    COMMENTS = "COMMENTS"
    ISSUES = "ISSUES"


TASKS: tuple[TaskId, ...] = tuple(TaskId)
