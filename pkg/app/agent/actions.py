from typing import List, Tuple

from app.agent.views import Action, ActionSpaceConfig
from app.errors import ActionOutOfRangeError


class ActionSpace:
    """Joint grid of power-of-two (VF, IF) pairs, indexed as vf_idx * |ifs| + if_idx."""

    def __init__(self, max_vf: int = 16, max_if: int = 8):
        config = ActionSpaceConfig(max_vf=max_vf, max_if=max_if)
        self.max_vf = config.max_vf
        self.max_if = config.max_if
        self.vfs: List[int] = [1 << k for k in range(self.max_vf.bit_length())]
        self.ifs: List[int] = [1 << k for k in range(self.max_if.bit_length())]

    @classmethod
    def from_config(cls, config: ActionSpaceConfig) -> "ActionSpace":
        return cls(config.max_vf, config.max_if)

    def to_config(self) -> ActionSpaceConfig:
        return ActionSpaceConfig(max_vf=self.max_vf, max_if=self.max_if)

    def __len__(self) -> int:
        return len(self.vfs) * len(self.ifs)

    def __eq__(self, other) -> bool:
        return isinstance(other, ActionSpace) and (self.vfs, self.ifs) == (other.vfs, other.ifs)

    def encode(self, vf_idx: int, if_idx: int) -> int:
        if not (0 <= vf_idx < len(self.vfs) and 0 <= if_idx < len(self.ifs)):
            raise ActionOutOfRangeError(detail=f"Grid position ({vf_idx}, {if_idx}) outside the action space")
        return vf_idx * len(self.ifs) + if_idx

    def decode(self, index: int) -> Tuple[int, int]:
        if not 0 <= index < len(self):
            raise ActionOutOfRangeError(detail=f"Action index {index} outside [0, {len(self)})")
        return divmod(index, len(self.ifs))

    def action(self, index: int) -> Action:
        vf_idx, if_idx = self.decode(index)
        return Action(index, self.vfs[vf_idx], self.ifs[if_idx])

    def action_for(self, vf: int, if_: int) -> Action:
        if not self.contains(vf, if_):
            raise ActionOutOfRangeError(
                detail=f"Factors ({vf}, {if_}) outside the action space", context={"vf": vf, "if": if_}
            )
        return self.action(self.encode(self.vfs.index(vf), self.ifs.index(if_)))

    def contains(self, vf: int, if_: int) -> bool:
        return vf in self.vfs and if_ in self.ifs

    def actions(self) -> List[Action]:
        return [self.action(i) for i in range(len(self))]
