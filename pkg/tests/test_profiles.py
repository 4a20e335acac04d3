"""The checked-in config files must stay in lockstep with the profile
builders; regenerate them after editing adtomo/profiles.py:

    python -c "import json, pathlib; from adtomo.profiles import PROFILES, get_profile; \
[pathlib.Path('configs', n + '.json').write_text(json.dumps(get_profile(n), indent=2) + '\\n') \
 for n in PROFILES]"
"""

import json
from pathlib import Path

import pytest

from adtomo.profiles import PROFILES, get_profile

CONFIG_DIR = Path(__file__).parent.parent / "configs"


@pytest.mark.parametrize("name", sorted(PROFILES))
def test_config_file_matches_builder(name):
    on_disk = json.loads((CONFIG_DIR / f"{name}.json").read_text())
    assert on_disk == get_profile(name)


def test_unknown_profile_rejected():
    with pytest.raises(KeyError, match="unknown profile"):
        get_profile("galactic")
