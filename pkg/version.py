#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
TwoCensus 统一版本配置文件
setup.py 以这里为准

更新说明：
- 修改版本号时同步更新 src/twocensus/__init__.py
"""

__version__ = "0.1.0"

APP_NAME = "twocensus"
APP_DESCRIPTION = "有限 2-群的精确子群计数：枚举、闭式公式、Goursat 与二次型四条路径"
