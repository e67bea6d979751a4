import pytest

from rewind.models import AccessRights


@pytest.mark.unit
@pytest.mark.parametrize("rights, read, write", [
    (AccessRights.no_access, False, False),
    (AccessRights.read_only, True, False),
    (AccessRights.read_write, True, True),
])
def test_rights_allow_expected_accesses(rights, read, write):
    assert rights.allows(write=False) is read
    assert rights.allows(write=True) is write


@pytest.mark.unit
def test_most_permissive_picks_widest_rights():
    assert AccessRights.most_permissive([AccessRights.no_access, AccessRights.read_only]) is AccessRights.read_only
    assert AccessRights.most_permissive([AccessRights.read_write, AccessRights.no_access]) is \
        AccessRights.read_write
    assert AccessRights.most_permissive([]) is AccessRights.no_access
