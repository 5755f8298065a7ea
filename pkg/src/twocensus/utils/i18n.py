"""
国际化(i18n)模块
为命令行报告提供多语言文本
"""

import json
import logging
import os
import sys
from typing import Any, Dict, Optional

logger = logging.getLogger(__name__)


class I18nManager:
    """
    国际化管理器 - 单例模式
    负责加载、管理和切换报告文本的多语言翻译
    """

    _instance = None
    _initialized = False

    def __new__(cls, *args, **kwargs):
        """单例模式实现"""
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __init__(self, locale: Optional[str] = None):
        """初始化国际化管理器"""
        if self._initialized:
            return

        # 语言文件目录（开发环境与打包环境）
        possible_paths = [
            os.path.join(
                os.path.dirname(os.path.dirname(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))),
                'resources', 'i18n', 'locales'
            ),
            os.path.join(
                getattr(sys, '_MEIPASS', os.path.dirname(os.path.abspath(__file__))),
                'resources', 'i18n', 'locales'
            ),
            os.path.join(os.getcwd(), 'resources', 'i18n', 'locales'),
        ]
        self.locale_dir = next((p for p in possible_paths if os.path.isdir(p)), possible_paths[0])

        self._translations: Dict[str, Any] = {}
        self._fallback: Dict[str, Any] = {}
        self._current_locale: str = "en_US"
        self._fallback_locale: str = "en_US"
        self._missing_keys: set = set()

        self._initialized = True

        self._fallback = self._read(self._fallback_locale) or {}
        self.set_locale(locale or self._fallback_locale)
        logger.info(f"I18n manager initialized with locale: {self._current_locale}")

    def _read(self, locale: str) -> Optional[Dict[str, Any]]:
        path = os.path.join(self.locale_dir, f"{locale}.json")
        if not os.path.exists(path):
            return None
        try:
            with open(path, 'r', encoding='utf-8') as f:
                return json.load(f)
        except (OSError, ValueError) as e:
            logger.error(f"Error loading locale {locale}: {e}")
            return None

    def set_locale(self, locale: str):
        """
        设置当前语言

        Args:
            locale: 语言代码，如 "zh_CN", "en_US"
        """
        data = self._read(locale)
        if data is None:
            logger.warning(f"Locale file not found for {locale}, using {self._fallback_locale}")
            self._translations = self._fallback
            self._current_locale = self._fallback_locale
            return
        old_locale = self._current_locale
        self._translations = data
        self._current_locale = locale
        if old_locale != locale:
            logger.info(f"Locale changed from {old_locale} to {locale}")

    @staticmethod
    def _lookup(table: Dict[str, Any], key: str) -> Optional[Any]:
        value: Any = table
        for part in key.split('.'):
            if not isinstance(value, dict) or part not in value:
                return None
            value = value[part]
        return value

    def tr(self, key: str, **kwargs) -> str:
        """
        翻译函数

        Args:
            key: 翻译键，使用点号分隔的层级结构，如 "report.pass"
            **kwargs: 格式化参数

        Returns:
            翻译后的文本；当前语言缺失时查后备语言，仍缺失则返回键名

        Examples:
            >>> tr("errors.syntax", message="expected an exponent", offset=4)
        """
        value = self._lookup(self._translations, key)
        if value is None:
            value = self._lookup(self._fallback, key)
        if value is None or isinstance(value, dict):
            if key not in self._missing_keys:
                self._missing_keys.add(key)
                logger.debug(f"Missing translation key: {key}")
            return key
        text = str(value)
        if kwargs:
            try:
                return text.format(**kwargs)
            except (KeyError, IndexError) as e:
                logger.error(f"Error formatting key '{key}': {e}")
        return text

    def get_available_locales(self) -> Dict[str, str]:
        """可用语言 {代码: 语言名}"""
        locales = {}
        if not os.path.isdir(self.locale_dir):
            return locales
        for name in sorted(os.listdir(self.locale_dir)):
            if name.endswith('.json'):
                code = name[:-5]
                data = self._read(code) or {}
                locales[code] = data.get('meta', {}).get('language', code)
        return locales

    def get_current_locale(self) -> str:
        return self._current_locale

    @property
    def missing_keys(self) -> set:
        return set(self._missing_keys)


# ============================================================================
# 全局单例和便捷函数
# ============================================================================

_i18n: Optional[I18nManager] = None


def get_i18n_manager() -> I18nManager:
    """获取国际化管理器单例"""
    global _i18n
    if _i18n is None:
        _i18n = I18nManager()
    return _i18n


def tr(key: str, **kwargs) -> str:
    """全局翻译函数（便捷方法）"""
    return get_i18n_manager().tr(key, **kwargs)


def set_language(locale: str):
    """设置语言（便捷方法）"""
    get_i18n_manager().set_locale(locale)


def get_available_languages() -> Dict[str, str]:
    return get_i18n_manager().get_available_locales()
