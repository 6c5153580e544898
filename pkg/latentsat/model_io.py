"""
权重文件与网络结构清单。

`.rvwt` 权重文件（全部小端序）:

| 字段 | 类型 |
| --- | --- |
| 魔数 `RVWT` | 4 字节 |
| 版本 | u32，当前为 `1` |
| 条目数 | u32 |
| 保留 | u32，必须为 `0` |

之后每个条目依次为: u32 名称长度、UTF-8 名称、u32 维数、u32 × 维数、`float32` 数据。

`.arch` 结构清单是纯文本，每行一个层，字段形如 `key=value`，以空格分隔；`#` 开头的行为注释:

```
input_shape=4,32,32
latent_dim=128
kind=conv2d name=enc.conv1 in=4 out=32 kernel=3 stride=2 padding=1
kind=activation name=enc.act1 fn=leaky_relu alpha=0.01
kind=linear name=enc.fc_mu in=1024 out=128 head=mu
kind=linear name=enc.fc_logvar in=1024 out=128 head=logvar
```

带 `head` 字段的线性层是并行的输出头，共同读取主干的输出（展平）。
"""
import math
import struct
from typing import Dict, Iterator, List, Mapping, Optional, Tuple, Union

import numpy as np

from .exceptions import (BadMagicError, BindShapeError, FormatError,
                         MissingEntryError, NonFiniteError, ShapeMismatchError,
                         TruncatedError, UnsupportedVersionError)
from .log import logger
from .typing import PathLike_T, Shape_T, Tensor_T

MAGIC = b'RVWT'
FORMAT_VERSION = 1
MAX_RANK = 8

_HEADER = struct.Struct('<4sIII')
_U32 = struct.Struct('<I')

ParamValue_T = Union[int, float, str]


class WeightSet:
    """
    有序的命名权重集合。条目顺序即网络结构的前向顺序，名称唯一，所有数据为只读 `float32` 数组。

    参数:
        entries: `(名称, 数组)` 序列或有序映射
        format_version: 文件格式版本

    用法:
        ```python
        ws = WeightSet([('clf.w', w), ('clf.b', np.array([b], np.float32))])
        save_weights(ws, 'classifier.rvwt')
        ```
    """
    __slots__ = ('_entries', 'format_version')

    def __init__(self,
                 entries: Union[Mapping[str, np.ndarray],
                                List[Tuple[str, np.ndarray]]] = (),
                 format_version: int = FORMAT_VERSION):
        items = entries.items() if isinstance(entries, Mapping) else entries
        self._entries: Dict[str, Tensor_T] = {}
        for name, data in items:
            if name in self._entries:
                raise ShapeMismatchError(f'duplicate weight entry "{name}"')
            arr = np.array(data, dtype=np.float32, order='C')
            if arr.ndim == 0:
                arr = arr.reshape(1)
            arr.setflags(write=False)
            self._entries[name] = arr
        self.format_version = format_version

    def __getitem__(self, name: str) -> Tensor_T:
        return self._entries[name]

    def __contains__(self, name: object) -> bool:
        return name in self._entries

    def __iter__(self) -> Iterator[Tuple[str, Tensor_T]]:
        return iter(self._entries.items())

    def __len__(self) -> int:
        return len(self._entries)

    @property
    def names(self) -> List[str]:
        return list(self._entries)

    def __eq__(self, other: object) -> bool:
        """逐位比较（名称、顺序、形状、数据字节）。"""
        if not isinstance(other, WeightSet):
            return NotImplemented
        if self.names != other.names:
            return False
        return all(a.shape == other[n].shape and a.tobytes() == other[n].tobytes()
                   for n, a in self)

    def __repr__(self) -> str:
        shapes = ', '.join(f'{n}{list(a.shape)}' for n, a in self)
        return f'WeightSet({shapes})'


def encode_weights(ws: WeightSet) -> bytes:
    """将权重集编码为 `.rvwt` 字节串。"""
    parts = [_HEADER.pack(MAGIC, ws.format_version, len(ws), 0)]
    for name, arr in ws:
        raw_name = name.encode('utf-8')
        parts.append(_U32.pack(len(raw_name)))
        parts.append(raw_name)
        parts.append(_U32.pack(arr.ndim))
        parts.append(struct.pack(f'<{arr.ndim}I', *arr.shape))
        parts.append(arr.astype('<f4').tobytes())
    return b''.join(parts)


def save_weights(ws: WeightSet, path: PathLike_T) -> None:
    """
    将权重集写入 `.rvwt` 文件，写出的文件经 `load_weights` 读回后逐位相同。

    参数:
        ws: 权重集
        path: 目标路径

    异常:
        OSError: 写入失败
    """
    data = encode_weights(ws)
    with open(path, 'wb') as f:
        f.write(data)
    logger.debug(f'Wrote {len(ws)} weight entries ({len(data)} bytes) to {path}')


class _Reader:
    """INTERNAL API"""
    __slots__ = ('data', 'pos')

    def __init__(self, data: bytes):
        self.data = memoryview(data)
        self.pos = 0

    def take(self, n: int, what: str) -> memoryview:
        if n > len(self.data) - self.pos:
            raise TruncatedError(
                f'file truncated while reading {what} at byte {self.pos}')
        chunk = self.data[self.pos:self.pos + n]
        self.pos += n
        return chunk

    def u32(self, what: str) -> int:
        return _U32.unpack(self.take(4, what))[0]


def decode_weights(data: bytes) -> WeightSet:
    """
    解析 `.rvwt` 字节串。任何输入要么得到完整校验过的权重集，要么抛出 `FormatError` 的子类。

    异常:
        BadMagicError: 魔数错误
        UnsupportedVersionError: 版本不受支持
        TruncatedError: 数据提前结束
        ShapeMismatchError: 条目名称、维数或形状不合法
        NonFiniteError: 权重中含有 NaN 或 Inf
        FormatError: 其它结构错误（例如文件末尾有多余字节）
    """
    reader = _Reader(data)
    if len(data) < 4 or bytes(data[:4]) != MAGIC:
        raise BadMagicError('not a weight file (bad magic)')
    magic, version, count, reserved = _HEADER.unpack(reader.take(_HEADER.size, 'header'))
    if version != FORMAT_VERSION:
        raise UnsupportedVersionError(f'unsupported weight file version {version}')
    if reserved != 0:
        raise FormatError(f'reserved header field is {reserved}, expected 0')

    entries: List[Tuple[str, np.ndarray]] = []
    seen = set()
    for i in range(count):
        name_len = reader.u32(f'name length of entry {i}')
        try:
            name = bytes(reader.take(name_len, f'name of entry {i}')).decode('utf-8')
        except UnicodeDecodeError as e:
            raise ShapeMismatchError(f'entry {i} name is not valid UTF-8') from e
        if not name or name in seen:
            raise ShapeMismatchError(f'entry {i} has an empty or duplicate name')
        seen.add(name)
        rank = reader.u32(f'rank of "{name}"')
        if not 1 <= rank <= MAX_RANK:
            raise ShapeMismatchError(f'entry "{name}" has unsupported rank {rank}')
        dims = struct.unpack(f'<{rank}I', reader.take(4 * rank, f'dims of "{name}"'))
        if 0 in dims:
            raise ShapeMismatchError(f'entry "{name}" has a zero dimension {dims}')
        n = math.prod(dims)
        payload = reader.take(4 * n, f'data of "{name}"')
        arr = np.frombuffer(payload, dtype='<f4').astype(np.float32).reshape(dims)
        if not np.isfinite(arr).all():
            raise NonFiniteError(f'entry "{name}" contains non-finite values')
        entries.append((name, arr))
    if reader.pos != len(data):
        raise FormatError(f'{len(data) - reader.pos} trailing bytes after last entry')
    return WeightSet(entries, format_version=version)


def load_weights(path: PathLike_T) -> WeightSet:
    """
    读取 `.rvwt` 文件。

    参数:
        path: 文件路径

    返回:
        WeightSet: 校验过的权重集，不会返回部分初始化的结果

    异常:
        OSError: 文件不存在或读取失败
        FormatError: 见 `decode_weights`
    """
    with open(path, 'rb') as f:
        data = f.read()
    ws = decode_weights(data)
    logger.debug(f'Loaded {len(ws)} weight entries from {path}')
    return ws


class LayerSpec:
    """
    结构清单中的一层。

    `kind` 为 `conv2d`、`linear` 或 `activation`；`params` 为该层的超参数，例如卷积层的 `in`、`out`、`kernel`、`stride`、`padding`。
    """
    __slots__ = ('kind', 'name', 'params')

    _REQUIRED = {
        'conv2d': ('in', 'out', 'kernel', 'stride', 'padding'),
        'linear': ('in', 'out'),
        'activation': ('fn', 'alpha'),
    }
    _ACTIVATIONS = ('leaky_relu',)

    def __init__(self, kind: str, name: str, params: Dict[str, ParamValue_T]):
        if kind not in self._REQUIRED:
            raise FormatError(f'unknown layer kind "{kind}"')
        missing = [k for k in self._REQUIRED[kind] if k not in params]
        if missing:
            raise FormatError(f'layer "{name}" is missing {missing}')
        fn = params.get('fn')
        if kind == 'activation' and fn not in self._ACTIVATIONS:
            raise FormatError(f'layer "{name}" has unsupported activation "{fn}"')
        self.kind = kind
        self.name = name
        self.params = dict(params)

    @property
    def head(self) -> Optional[str]:
        """输出头名称（`mu` 或 `logvar`），主干层为 `None`。"""
        head = self.params.get('head')
        return str(head) if head is not None else None

    def param_shapes(self) -> List[Tuple[str, Shape_T]]:
        """该层需要的权重条目名称及形状，按前向顺序排列。"""
        p = self.params
        if self.kind == 'conv2d':
            k = int(p['kernel'])
            return [(f'{self.name}.weight', (int(p['out']), int(p['in']), k, k)),
                    (f'{self.name}.bias', (int(p['out']),))]
        if self.kind == 'linear':
            return [(f'{self.name}.weight', (int(p['out']), int(p['in']))),
                    (f'{self.name}.bias', (int(p['out']),))]
        return []

    def output_shape(self, in_shape: Shape_T) -> Shape_T:
        """
        根据输入形状推出输出形状。

        异常:
            FormatError: 输入形状与该层声明不一致
        """
        p = self.params
        if self.kind == 'conv2d':
            if len(in_shape) != 3 or in_shape[0] != int(p['in']):
                raise FormatError(
                    f'layer "{self.name}" expects {p["in"]} input channels, got shape {in_shape}')
            k, s, pad = int(p['kernel']), int(p['stride']), int(p['padding'])
            h, w = in_shape[1] + 2 * pad, in_shape[2] + 2 * pad
            if h < k or w < k or s < 1:
                raise FormatError(f'layer "{self.name}" cannot convolve shape {in_shape}')
            return int(p['out']), (h - k) // s + 1, (w - k) // s + 1
        if self.kind == 'linear':
            if math.prod(in_shape) != int(p['in']):
                raise FormatError(
                    f'layer "{self.name}" expects {p["in"]} inputs, got shape {in_shape}')
            return (int(p['out']),)
        return tuple(in_shape)

    def to_line(self) -> str:
        fields = [f'kind={self.kind}', f'name={self.name}']
        fields.extend(f'{k}={v}' for k, v in self.params.items())
        return ' '.join(fields)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, LayerSpec):
            return NotImplemented
        return (self.kind, self.name, self.params) == \
            (other.kind, other.name, other.params)

    def __repr__(self) -> str:
        return f'LayerSpec({self.to_line()})'


class ArchSpec:
    """
    编码器的结构清单。构造时即检查形状链: 每层的输入形状等于上一层的输出形状，两个输出头的输出维度都等于 `latent_dim`。

    参数:
        layers: 按前向顺序排列的层
        input_shape: 输入瓦片的形状 `[C, H, W]`
        latent_dim: 隐向量维度

    异常:
        FormatError: 形状链不一致或缺少输出头
    """
    __slots__ = ('layers', 'input_shape', 'latent_dim')

    def __init__(self, layers: List[LayerSpec], input_shape: Shape_T,
                 latent_dim: int):
        self.layers: Tuple[LayerSpec, ...] = tuple(layers)
        self.input_shape: Shape_T = tuple(int(d) for d in input_shape)
        self.latent_dim = int(latent_dim)
        self._check_chain()

    @property
    def trunk(self) -> Tuple[LayerSpec, ...]:
        return tuple(layer for layer in self.layers if layer.head is None)

    @property
    def heads(self) -> Dict[str, LayerSpec]:
        return {layer.head: layer for layer in self.layers if layer.head is not None}

    def _check_chain(self) -> None:
        names = [layer.name for layer in self.layers]
        if len(set(names)) != len(names):
            raise FormatError('layer names must be unique')
        shape = self.input_shape
        in_heads = False
        for layer in self.layers:
            if layer.head is not None:
                in_heads = True
                if layer.kind != 'linear':
                    raise FormatError(f'head "{layer.name}" must be a linear layer')
                if layer.output_shape(shape) != (self.latent_dim,):
                    raise FormatError(
                        f'head "{layer.name}" must output {self.latent_dim} values')
            elif in_heads:
                raise FormatError(f'trunk layer "{layer.name}" follows an output head')
            else:
                shape = layer.output_shape(shape)
        if set(self.heads) != {'mu', 'logvar'}:
            raise FormatError('architecture needs exactly the heads "mu" and "logvar"')

    def param_shapes(self) -> List[Tuple[str, Shape_T]]:
        """全部权重条目的名称与形状，按前向顺序排列。"""
        return [entry for layer in self.layers for entry in layer.param_shapes()]

    def to_text(self) -> str:
        lines = ['# latentsat encoder architecture',
                 'input_shape=' + ','.join(str(d) for d in self.input_shape),
                 f'latent_dim={self.latent_dim}']
        lines.extend(layer.to_line() for layer in self.layers)
        return '\n'.join(lines) + '\n'

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ArchSpec):
            return NotImplemented
        return (self.layers, self.input_shape, self.latent_dim) == \
            (other.layers, other.input_shape, other.latent_dim)


def _parse_value(raw: str) -> ParamValue_T:
    for conv in (int, float):
        try:
            return conv(raw)
        except ValueError:
            pass
    return raw


def parse_arch(text: str) -> ArchSpec:
    """
    解析 `.arch` 文本。

    异常:
        FormatError: 行格式错误、缺少字段或形状链不一致
    """
    input_shape: Optional[Shape_T] = None
    latent_dim: Optional[int] = None
    layers: List[LayerSpec] = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith('#'):
            continue
        fields: Dict[str, str] = {}
        for token in line.split():
            key, sep, value = token.partition('=')
            if not sep or not key:
                raise FormatError(f'arch line {lineno}: malformed field "{token}"')
            fields[key] = value
        try:
            if 'input_shape' in fields:
                input_shape = tuple(int(d) for d in fields['input_shape'].split(','))
            elif 'latent_dim' in fields:
                latent_dim = int(fields['latent_dim'])
            else:
                kind = fields.pop('kind')
                name = fields.pop('name')
                layers.append(LayerSpec(kind, name,
                                        {k: _parse_value(v) for k, v in fields.items()}))
        except (KeyError, ValueError) as e:
            if isinstance(e, FormatError):
                raise
            raise FormatError(f'arch line {lineno}: {e}') from e
    if input_shape is None or latent_dim is None:
        raise FormatError('arch manifest needs input_shape and latent_dim')
    try:
        return ArchSpec(layers, input_shape, latent_dim)
    except ValueError as e:
        if isinstance(e, FormatError):
            raise
        # non-numeric layer parameters
        raise FormatError(f'arch manifest: {e}') from e


def save_arch(arch: ArchSpec, path: PathLike_T) -> None:
    """将结构清单写入 `.arch` 文件。"""
    with open(path, 'w', encoding='utf-8', newline='\n') as f:
        f.write(arch.to_text())


def load_arch(path: PathLike_T) -> ArchSpec:
    """读取 `.arch` 文件，见 `parse_arch`。"""
    with open(path, 'r', encoding='utf-8') as f:
        return parse_arch(f.read())


class BoundLayer:
    """INTERNAL API"""
    __slots__ = ('spec', 'weight', 'bias')

    def __init__(self, spec: LayerSpec, weight: Optional[Tensor_T],
                 bias: Optional[Tensor_T]):
        self.spec = spec
        self.weight = weight
        self.bias = bias


class BoundModel:
    """
    绑定了权重的编码器，绑定后不可变，可在多个线程间共享。

    属性:
        arch: 结构清单
        trunk: 主干层
        heads: 输出头，键为 `mu`、`logvar`
    """
    __slots__ = ('arch', 'trunk', 'heads')

    def __init__(self, arch: ArchSpec, trunk: Tuple[BoundLayer, ...],
                 heads: Dict[str, BoundLayer]):
        self.arch = arch
        self.trunk = trunk
        self.heads = heads

    @property
    def input_shape(self) -> Shape_T:
        return self.arch.input_shape

    @property
    def latent_dim(self) -> int:
        return self.arch.latent_dim


def bind(ws: WeightSet, arch: ArchSpec) -> BoundModel:
    """
    将权重集与结构清单绑定。

    参数:
        ws: 权重集
        arch: 结构清单

    返回:
        BoundModel: 可用于前向计算的不可变模型

    异常:
        MissingEntryError: 权重集缺少某层需要的条目
        BindShapeError: 条目形状与结构不符，异常信息包含层名与两种形状

    用法:
        ```python
        model = bind(load_weights('encoder.rvwt'), load_arch('encoder.arch'))
        ```
    """
    def bound(layer: LayerSpec) -> BoundLayer:
        arrays = []
        for entry, shape in layer.param_shapes():
            if entry not in ws:
                raise MissingEntryError(entry)
            if ws[entry].shape != shape:
                raise BindShapeError(layer.name, shape, ws[entry].shape)
            arrays.append(ws[entry])
        weight, bias = arrays if arrays else (None, None)
        return BoundLayer(layer, weight, bias)

    trunk = tuple(bound(layer) for layer in arch.trunk)
    heads = {name: bound(layer) for name, layer in arch.heads.items()}
    return BoundModel(arch, trunk, heads)


def load_model(weights_path: PathLike_T, arch_path: PathLike_T) -> BoundModel:
    """读取权重文件与结构清单并绑定，见 `bind`。"""
    model = bind(load_weights(weights_path), load_arch(arch_path))
    logger.info(f'Loaded encoder {weights_path} '
                f'({len(model.trunk)} trunk layers, latent_dim={model.latent_dim})')
    return model


__all__ = [
    'MAGIC',
    'FORMAT_VERSION',
    'WeightSet',
    'encode_weights',
    'decode_weights',
    'save_weights',
    'load_weights',
    'LayerSpec',
    'ArchSpec',
    'parse_arch',
    'save_arch',
    'load_arch',
    'BoundModel',
    'bind',
    'load_model',
]

__autodoc__ = {
    "BoundLayer": False,
}
