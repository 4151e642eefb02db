"""
配置管理器模块
提供构建配置的持久化存储和加载功能
"""

import copy
import json
import logging
import os
from typing import Any, Dict, List, Optional, Tuple

from utils.validation_schemas import get_validator


class ConfigManager:
    """应用程序配置管理器"""

    def __init__(self, config_file: str = "app_config.json"):
        """
        初始化配置管理器

        Args:
            config_file: 配置文件路径；相对路径按程序目录解析
        """
        if os.path.isabs(config_file):
            self.config_file = config_file
        else:
            self.config_file = os.path.join(os.path.dirname(os.path.dirname(__file__)), config_file)
        self.config = self._load_config()

    def _load_config(self) -> Dict[str, Any]:
        """从文件加载配置，缺失的字段用默认值补齐"""
        if os.path.exists(self.config_file):
            try:
                with open(self.config_file, 'r', encoding='utf-8') as f:
                    config_data = json.load(f)

                # 验证配置文件结构
                if self._validate_config_structure(config_data):
                    return self._merge_defaults(config_data)
                else:
                    logging.warning(f"配置文件结构无效，使用默认配置: {self.config_file}")
                    return self._get_default_config()

            except (json.JSONDecodeError, OSError, UnicodeDecodeError) as e:
                logging.error(f"加载配置文件失败: {e}")

        # 返回默认配置
        return self._get_default_config()

    def _validate_config_structure(self, config: Dict[str, Any]) -> bool:
        """
        按 APP_CONFIG_SCHEMA 验证配置文件结构

        Args:
            config: 要验证的配置字典

        Returns:
            bool: 配置是否有效
        """
        if not isinstance(config, dict):
            return False

        errors = self.check(config)
        for message in errors:
            logging.error(f"配置字段无效: {message}")
        return not errors

    def check(self, config: Optional[Dict[str, Any]] = None) -> List[str]:
        """检查配置（默认为当前配置），返回 "路径: 错误" 形式的列表"""
        config = self.config if config is None else config
        errors = get_validator().validate_app_config(config)
        if not errors:
            low, high = config.get("build", {}).get("range", [-8.0, 8.0])
            if low > high:
                errors.append(f"build.range: 激励范围无效: [{low}, {high}]")
        return errors

    def _merge_defaults(self, config: Dict[str, Any]) -> Dict[str, Any]:
        """用默认配置补齐缺失的字段"""
        merged = self._get_default_config()
        for section, values in config.items():
            merged[section].update(values)
        return merged

    def _get_default_config(self) -> Dict[str, Any]:
        """获取默认配置"""
        return copy.deepcopy({
            "build": {
                "mode": "pipelined",
                "out_dir": "build",
                "lib_dir": "hwlib",
                "seed": 1,
                "stim": 10,
                "range": [-8.0, 8.0],
                "emit_testbench": True,
                "emit_report": True,
                "assertions": True,
                "max_workers": 4
            },
            "logging": {
                "level": "INFO"
            },
            "limits": {
                "memory_budget_mb": 200
            }
        })

    def save_config(self) -> bool:
        """保存配置到文件"""
        try:
            # 确保目录存在
            os.makedirs(os.path.dirname(self.config_file), exist_ok=True)

            with open(self.config_file, 'w', encoding='utf-8') as f:
                json.dump(self.config, f, indent=2, ensure_ascii=False)
            return True
        except OSError as e:
            logging.error(f"保存配置文件失败: {e}")
            return False

    def get(self, key: str, default: Any = None) -> Any:
        """获取配置项，支持 build.seed 形式的点分键"""
        keys = key.split('.')
        value = self.config

        for k in keys:
            if isinstance(value, dict) and k in value:
                value = value[k]
            else:
                return default

        return value

    def set(self, key: str, value: Any) -> None:
        """设置配置项"""
        keys = key.split('.')
        config = self.config

        # 创建嵌套字典结构
        for k in keys[:-1]:
            if not isinstance(config.get(k), dict):
                config[k] = {}
            config = config[k]

        config[keys[-1]] = value

    def get_build_settings(self) -> Dict[str, Any]:
        """获取全部构建配置"""
        return dict(self.get("build", {}))

    def get_stimulus_range(self) -> Tuple[float, float]:
        """获取默认激励范围"""
        low, high = self.get("build.range", [-8.0, 8.0])
        return float(low), float(high)

    def get_log_level(self) -> str:
        """获取日志级别"""
        return self.get("logging.level", "INFO")

    def get_memory_budget_mb(self) -> int:
        """获取单阶段内存增长上限（MB）"""
        return self.get("limits.memory_budget_mb", 200)


# 全局配置管理器实例
_config_manager: Optional[ConfigManager] = None


def get_config_manager(config_file: Optional[str] = None) -> ConfigManager:
    """获取全局配置管理器实例；传入 config_file 时重新加载"""
    global _config_manager
    if _config_manager is None or config_file is not None:
        _config_manager = ConfigManager(config_file or "app_config.json")
    return _config_manager
