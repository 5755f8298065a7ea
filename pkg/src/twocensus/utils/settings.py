"""
设置管理 - TwoCensus

主要功能：
- 从 resources/config/defaults.json 加载默认限制
- 应用命令行参数覆盖（不读取环境变量）
- 提供全局单例访问
"""

import json
import logging
import os
import sys
from dataclasses import dataclass, fields, replace
from typing import Any, Dict, Optional

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Settings:
    """引擎配置（不可变）"""

    oracle_cap: int = 256
    oracle_hard_cap: int = 512
    build_cap: int = 4096
    enumeration_cap: int = 24
    section_cap: int = 128
    lemma22_cap: int = 64
    auto_threshold: int = 256
    closed_form_check_dim: int = 10
    associativity_exhaustive_limit: int = 256
    associativity_samples: int = 100000
    random_seed: int = 20240601
    workers: int = 1
    language: str = "en_US"

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "Settings":
        """从分组的 JSON 数据构建，未知键忽略"""
        known = {f.name for f in fields(cls)}
        flat: Dict[str, Any] = {}
        for section in ("limits", "validation", "runtime"):
            for key, value in data.get(section, {}).items():
                if key in known:
                    flat[key] = value
                else:
                    logger.warning(f"Ignoring unknown setting {section}.{key}")
        return cls(**flat)

    def with_overrides(self, **overrides: Any) -> "Settings":
        """返回应用了覆盖值的新设置；值为 None 的项保持不变"""
        changes = {k: v for k, v in overrides.items() if v is not None}
        if not changes:
            return self
        unknown = set(changes) - {f.name for f in fields(self)}
        if unknown:
            raise ValueError(f"Unknown settings: {sorted(unknown)}")
        return replace(self, **changes)


class SettingsManager:
    """设置管理器"""

    def __init__(self, config_dir: Optional[str] = None):
        if config_dir:
            self.config_dir = config_dir
        else:
            # 开发环境与打包环境的候选路径
            possible_paths = [
                os.path.join(
                    os.path.dirname(os.path.dirname(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))),
                    'resources', 'config'
                ),
                os.path.join(
                    getattr(sys, '_MEIPASS', os.path.dirname(os.path.abspath(__file__))),
                    'resources', 'config'
                ),
                os.path.join(os.getcwd(), 'resources', 'config'),
            ]
            self.config_dir = next((p for p in possible_paths if os.path.exists(p)), possible_paths[0])

        self.settings = self._load_defaults()

    def _load_defaults(self) -> Settings:
        """加载默认配置文件，失败时使用内置默认值"""
        path = os.path.join(self.config_dir, 'defaults.json')
        if not os.path.exists(path):
            logger.warning(f"Config file not found: {path}, using built-in defaults")
            return Settings()
        try:
            with open(path, 'r', encoding='utf-8') as f:
                data = json.load(f)
            settings = Settings.from_dict(data)
            logger.info(f"Loaded settings from {path}")
            return settings
        except (OSError, ValueError, TypeError) as e:
            logger.error(f"Error loading settings {path}: {e}")
            return Settings()

    def apply_overrides(self, **overrides: Any) -> Settings:
        """应用命令行覆盖并返回当前设置"""
        self.settings = self.settings.with_overrides(**overrides)
        if self.settings.oracle_cap > self.settings.oracle_hard_cap:
            raise ValueError(
                f"oracle cap {self.settings.oracle_cap} above hard cap {self.settings.oracle_hard_cap}"
            )
        return self.settings


# ============================================================================
# 全局单例和便捷函数
# ============================================================================

_manager: Optional[SettingsManager] = None


def get_settings_manager() -> SettingsManager:
    """获取设置管理器单例"""
    global _manager
    if _manager is None:
        _manager = SettingsManager()
    return _manager


def get_settings() -> Settings:
    """获取当前设置（便捷方法）"""
    return get_settings_manager().settings


def reset_settings() -> None:
    """丢弃覆盖值，重新加载默认设置"""
    global _manager
    _manager = None
