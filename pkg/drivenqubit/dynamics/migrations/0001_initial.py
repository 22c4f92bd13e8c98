from django.db import migrations, models


class Migration(migrations.Migration):

    initial = True

    dependencies = []

    operations = [
        migrations.CreateModel(
            name='Run',
            fields=[
                ('id', models.BigAutoField(auto_created=True, primary_key=True, serialize=False, verbose_name='ID')),
                ('command', models.CharField(choices=[('kernel', 'Двухвременное ядро'), ('evolve', 'Вероятность перехода p(t, 0)'), ('prob-map', 'Двухвременная вероятность p(t, s)'), ('rabi-map', 'Карта частот Раби'), ('avg-map', 'Карта средней заселённости'), ('quasi', 'Квазиэнергии'), ('heff', 'Эффективный гамильтониан'), ('validate', 'Сверка с эталоном'), ('gbf', 'Таблица J_l')], max_length=15, verbose_name='Команда')),
                ('status', models.CharField(choices=[('running', 'Выполняется'), ('done', 'Завершён'), ('failed', 'Ошибка')], default='running', max_length=10, verbose_name='Статус')),
                ('spec', models.JSONField(blank=True, null=True, verbose_name='Описание драйва')),
                ('knobs', models.JSONField(blank=True, default=dict, verbose_name='Настройки')),
                ('diagnostics', models.JSONField(blank=True, default=dict, verbose_name='Диагностика')),
                ('artifact', models.CharField(blank=True, max_length=500, verbose_name='Файл результата')),
                ('manifest', models.CharField(blank=True, max_length=500, verbose_name='Манифест')),
                ('wall_time', models.FloatField(blank=True, null=True, verbose_name='Время счёта, с')),
                ('error', models.TextField(blank=True, verbose_name='Ошибка')),
                ('created_at', models.DateTimeField(auto_now_add=True, verbose_name='Дата создания')),
            ],
            options={
                'verbose_name': 'Запуск',
                'verbose_name_plural': 'Запуски',
                'ordering': ['-created_at'],
            },
        ),
    ]
