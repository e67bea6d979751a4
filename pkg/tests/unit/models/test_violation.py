import pytest

from rewind.models import Completed, ViolationKind, ViolationReport, Violated


@pytest.mark.unit
def test_only_protection_faults_carry_an_address():
    ViolationReport(ViolationKind.protection_fault, 1, 2, 3, faulting_address=0x1000)
    ViolationReport(ViolationKind.explicit_abort, 1, 2, 3, reason=7)

    with pytest.raises(AssertionError):
        ViolationReport(ViolationKind.protection_fault, 1, 2, 3)
    with pytest.raises(AssertionError):
        ViolationReport(ViolationKind.canary_mismatch, 1, 2, 3, faulting_address=0x1000)


@pytest.mark.unit
def test_report_serializes_kind_value():
    report = ViolationReport(ViolationKind.explicit_abort, 4, 5, 6, reason=9)

    assert report.serialize() == {"kind": "explicit-abort", "domain_id": 4, "thread_id": 5, "timestamp": 6,
                                  "faulting_address": None, "reason": 9}


@pytest.mark.unit
def test_outcomes_tell_completion():
    assert Completed(b"").completed
    assert not Violated(ViolationReport(ViolationKind.explicit_abort, 1, 2, 3)).completed
