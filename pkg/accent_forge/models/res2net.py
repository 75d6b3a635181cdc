"""
Classificadores 2D-CNN: SENet e a família Res2Net (SE / SCG / MLCG / Gemini).

Entrada [batch, bins, frames]; saída log-probabilidades [batch, 2] com a classe
spoof no índice 0 e bona fide no índice 1.
"""

from typing import List, Optional

import torch
import torch.nn as nn
import torch.nn.functional as F

from accent_forge.api.dto import ModelConfig
from accent_forge.api.exceptions import ShapeMismatchError
from accent_forge.models.gates import SEGate, make_gate


# variante -> gate do ramo hierárquico (None = sem gate entre ramos)
BRANCH_GATES = {
    "se_res2net": None,
    "scg_res2net": "scg",
    "mlcg_res2net": "mlcg",
    "gemini_res2net": None,
}


def conv3x3(in_planes: int, out_planes: int) -> nn.Conv2d:
    return nn.Conv2d(in_planes, out_planes, kernel_size=3, padding=1, bias=False)


def conv1x1(in_planes: int, out_planes: int) -> nn.Conv2d:
    return nn.Conv2d(in_planes, out_planes, kernel_size=1, bias=False)


def _shortcut(in_planes: int, planes: int) -> Optional[nn.Module]:
    if in_planes == planes:
        return None
    return nn.Sequential(conv1x1(in_planes, planes), nn.BatchNorm2d(planes))


class SEBasicBlock(nn.Module):
    def __init__(self, in_planes: int, planes: int, reduction: int):
        super().__init__()
        self.conv1 = conv3x3(in_planes, planes)
        self.bn1 = nn.BatchNorm2d(planes)
        self.conv2 = conv3x3(planes, planes)
        self.bn2 = nn.BatchNorm2d(planes)
        self.se = SEGate(planes, reduction)
        self.shortcut = _shortcut(in_planes, planes)

    def forward(self, x):
        identity = x if self.shortcut is None else self.shortcut(x)
        out = F.relu(self.bn1(self.conv1(x)))
        out = self.se(self.bn2(self.conv2(out)))
        return F.relu(out + identity)


class Res2NetBottleneck(nn.Module):
    """
    Bottleneck Res2Net: a saída do 1x1 é dividida em `scale` ramos;
    y_1 = x_1, y_2 = K_2(x_2) e y_i = K_i(x_i + g(y_{i-1})) para i > 2,
    onde g é o gate do ramo (identidade quando não configurado).
    SE é aplicado à saída do bloco antes da soma residual.
    """

    def __init__(self, in_planes: int, planes: int, scale: int, reduction: int, branch_gate: Optional[str]):
        super().__init__()
        self.scale = scale
        self.branch_width = planes // scale
        self.conv1 = conv1x1(in_planes, planes)
        self.bn1 = nn.BatchNorm2d(planes)
        self.convs = nn.ModuleList(conv3x3(self.branch_width, self.branch_width) for _ in range(scale - 1))
        self.bns = nn.ModuleList(nn.BatchNorm2d(self.branch_width) for _ in range(scale - 1))
        self.gates = None
        if branch_gate is not None:
            self.gates = nn.ModuleList(
                make_gate(branch_gate, self.branch_width, reduction) for _ in range(scale - 2)
            )
        self.conv3 = conv1x1(planes, planes)
        self.bn3 = nn.BatchNorm2d(planes)
        self.se = SEGate(planes, reduction)
        self.shortcut = _shortcut(in_planes, planes)

    def forward(self, x):
        identity = x if self.shortcut is None else self.shortcut(x)
        out = F.relu(self.bn1(self.conv1(x)))
        splits = torch.split(out, self.branch_width, dim=1)

        outputs = [splits[0]]
        previous = None
        for i in range(1, self.scale):
            branch = splits[i]
            if previous is not None:
                carried = previous if self.gates is None else self.gates[i - 2](previous, branch)
                branch = branch + carried
            previous = F.relu(self.bns[i - 1](self.convs[i - 1](branch)))
            outputs.append(previous)

        out = self.se(self.bn3(self.conv3(torch.cat(outputs, dim=1))))
        return F.relu(out + identity)


class AntiSpoofingCNN(nn.Module):
    """
    Backbone 2D com pooling entre estágios, pooling médio global, FC e log_softmax.

    A variante Gemini usa strides (freq, tempo) assimétricos por estágio; as demais
    reduzem as duas dimensões por 2 entre estágios.
    """

    def __init__(self, config: ModelConfig):
        super().__init__()
        self.config = config
        self.stem = nn.Sequential(conv3x3(1, config.width[0]), nn.BatchNorm2d(config.width[0]), nn.ReLU())

        stages: List[nn.Module] = []
        in_planes = config.width[0]
        for s, (planes, depth) in enumerate(zip(config.width, config.depth)):
            blocks = []
            for _ in range(depth):
                blocks.append(self._make_block(in_planes, planes))
                in_planes = planes
            if config.variant == "gemini_res2net":
                f_stride, t_stride = config.gemini_time_freq_ratio[s]
                blocks.append(nn.AvgPool2d(kernel_size=(f_stride, t_stride), ceil_mode=True))
            elif s < len(config.width) - 1:
                blocks.append(nn.AvgPool2d(kernel_size=2, ceil_mode=True))
            stages.append(nn.Sequential(*blocks))
        self.stages = nn.Sequential(*stages)
        self.fc = nn.Linear(in_planes, config.num_classes)

    def _make_block(self, in_planes: int, planes: int) -> nn.Module:
        if self.config.variant == "senet":
            return SEBasicBlock(in_planes, planes, self.config.se_reduction)
        return Res2NetBottleneck(
            in_planes, planes, self.config.res2net_scale, self.config.se_reduction, BRANCH_GATES[self.config.variant]
        )

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        if x.dim() != 3 or x.shape[1] != self.config.input_bins:
            raise ShapeMismatchError(f"[batch, {self.config.input_bins}, frames]", str(list(x.shape)))
        out = self.stages(self.stem(x.unsqueeze(1)))
        out = out.mean(dim=(2, 3))
        return F.log_softmax(self.fc(out), dim=-1)
