"""
配置管理器模块单元测试
测试utils/config_manager.py的配置持久化和验证功能
"""

import sys
import os
import json

# 添加项目路径
sys.path.insert(0, os.path.join(os.path.dirname(__file__), '..'))

from tests.conftest import benchmark


class TestConfigManager:
    """测试配置管理器基本功能"""

    def test_default_config_structure(self, test_env):
        """测试默认配置结构"""
        from utils.config_manager import ConfigManager

        # 在临时目录创建配置管理器（文件不存在）
        config_file = os.path.join(test_env.temp_dir, 'test_config.json')
        manager = ConfigManager(config_file)

        config = manager.config
        assert set(config.keys()) == {'build', 'logging', 'limits'}

        build = config['build']
        assert build['mode'] == 'pipelined'
        assert build['seed'] == 1
        assert build['stim'] == 10
        assert build['range'] == [-8.0, 8.0]
        assert build['emit_testbench'] is True
        assert build['assertions'] is True
        assert manager.get_log_level() == 'INFO'
        assert manager.get_memory_budget_mb() == 200

    def test_save_and_load_config(self, test_env):
        """测试配置保存和加载"""
        from utils.config_manager import ConfigManager

        config_file = os.path.join(test_env.temp_dir, 'save_load_test.json')

        manager1 = ConfigManager(config_file)
        manager1.set('build.mode', 'unrolled')
        manager1.set('build.seed', 42)
        manager1.set('logging.level', 'DEBUG')
        assert manager1.save_config() is True

        manager2 = ConfigManager(config_file)
        assert manager2.get('build.mode') == 'unrolled'
        assert manager2.get('build.seed') == 42
        assert manager2.get_log_level() == 'DEBUG'

    def test_partial_config_is_merged_with_defaults(self, test_env):
        """测试只写部分字段的配置文件会用默认值补齐"""
        from utils.config_manager import ConfigManager

        config_file = os.path.join(test_env.temp_dir, 'partial.json')
        with open(config_file, 'w', encoding='utf-8') as f:
            json.dump({'build': {'stim': 3}}, f)

        manager = ConfigManager(config_file)
        assert manager.get('build.stim') == 3
        assert manager.get('build.mode') == 'pipelined'
        assert manager.get_memory_budget_mb() == 200

    def test_config_validation(self, test_env):
        """测试配置验证功能"""
        from utils.config_manager import ConfigManager

        config_file = os.path.join(test_env.temp_dir, 'validation_test.json')

        # 未知模式违反 schema
        with open(config_file, 'w', encoding='utf-8') as f:
            json.dump({'build': {'mode': 'systolic'}}, f)

        manager = ConfigManager(config_file)
        assert manager.get('build.mode') == 'pipelined'

    def test_reversed_range_rejected(self, test_env):
        """测试上下界颠倒的激励范围被拒绝"""
        from utils.config_manager import ConfigManager

        config_file = os.path.join(test_env.temp_dir, 'range.json')
        with open(config_file, 'w', encoding='utf-8') as f:
            json.dump({'build': {'range': [4.0, -4.0]}}, f)

        manager = ConfigManager(config_file)
        assert manager.get_stimulus_range() == (-8.0, 8.0)

    def test_invalid_json_file(self, test_env):
        """测试无效JSON文件处理"""
        from utils.config_manager import ConfigManager

        config_file = os.path.join(test_env.temp_dir, 'invalid.json')
        with open(config_file, 'w', encoding='utf-8') as f:
            f.write('{"build": {"mode": ')

        # 应该使用默认配置
        manager = ConfigManager(config_file)
        assert manager.get('build.mode') == 'pipelined'


class TestConfigManagerAccessors:
    """测试点分键读写"""

    def test_get_nested_and_missing(self, test_env):
        """测试嵌套键读取与默认值"""
        from utils.config_manager import ConfigManager

        manager = ConfigManager(os.path.join(test_env.temp_dir, 'x.json'))
        assert manager.get('build.lib_dir') == 'hwlib'
        assert manager.get('build.nope') is None
        assert manager.get('build.nope', 7) == 7
        assert manager.get('logging.level.deeper', 'x') == 'x'

    def test_set_creates_sections(self, test_env):
        """测试设置不存在的嵌套键"""
        from utils.config_manager import ConfigManager

        manager = ConfigManager(os.path.join(test_env.temp_dir, 'x.json'))
        manager.set('extra.section.value', 5)
        assert manager.get('extra.section.value') == 5

    def test_check_reports_invalid_values(self, test_env):
        """测试 check 返回当前配置的全部违例"""
        from utils.config_manager import ConfigManager

        manager = ConfigManager(os.path.join(test_env.temp_dir, 'x.json'))
        assert manager.check() == []
        manager.set('build.range', [3, 1])
        assert manager.check() == ['build.range: 激励范围无效: [3, 1]']
        manager.set('build.stim', 0)
        (problem,) = manager.check()
        assert problem.startswith('build.stim:')

    def test_stimulus_range_is_float_tuple(self, test_env):
        """测试激励范围返回浮点元组"""
        from utils.config_manager import ConfigManager

        config_file = os.path.join(test_env.temp_dir, 'ints.json')
        with open(config_file, 'w', encoding='utf-8') as f:
            json.dump({'build': {'range': [-2, 2]}}, f)

        manager = ConfigManager(config_file)
        assert manager.get_stimulus_range() == (-2.0, 2.0)
        assert all(isinstance(x, float) for x in manager.get_stimulus_range())

    def test_build_settings_is_a_copy(self, test_env):
        """测试构建配置返回副本"""
        from utils.config_manager import ConfigManager

        manager = ConfigManager(os.path.join(test_env.temp_dir, 'x.json'))
        settings = manager.get_build_settings()
        settings['mode'] = 'unrolled'
        assert manager.get('build.mode') == 'pipelined'


class TestGlobalConfigManager:
    """测试全局配置管理器"""

    def test_reload_with_explicit_file(self, test_env):
        """测试传入配置文件时重新加载"""
        from utils.config_manager import get_config_manager

        config_file = os.path.join(test_env.temp_dir, 'global.json')
        with open(config_file, 'w', encoding='utf-8') as f:
            json.dump({'build': {'seed': 9}}, f)

        manager = get_config_manager(config_file)
        assert manager.get('build.seed') == 9
        # 不传参数时返回同一实例
        assert get_config_manager() is manager


class TestConfigManagerPerformance:
    """测试配置管理器性能"""

    @benchmark
    def test_load_performance(self, test_env):
        """测试配置加载性能"""
        from utils.config_manager import ConfigManager

        config_file = os.path.join(test_env.temp_dir, 'perf.json')
        for _ in range(50):
            ConfigManager(config_file)
