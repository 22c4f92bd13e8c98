from django.db import models

COMMAND_CHOICES = (
    ('kernel', 'Двухвременное ядро'),
    ('evolve', 'Вероятность перехода p(t, 0)'),
    ('prob-map', 'Двухвременная вероятность p(t, s)'),
    ('rabi-map', 'Карта частот Раби'),
    ('avg-map', 'Карта средней заселённости'),
    ('quasi', 'Квазиэнергии'),
    ('heff', 'Эффективный гамильтониан'),
    ('validate', 'Сверка с эталоном'),
    ('gbf', 'Таблица J_l'),
)

STATUS_CHOICES = (
    ('running', 'Выполняется'),
    ('done', 'Завершён'),
    ('failed', 'Ошибка'),
)


class Run(models.Model):
    command = models.CharField(verbose_name='Команда', choices=COMMAND_CHOICES, max_length=15)
    status = models.CharField(verbose_name='Статус', choices=STATUS_CHOICES, max_length=10, default='running')
    spec = models.JSONField(verbose_name='Описание драйва', blank=True, null=True)
    knobs = models.JSONField(verbose_name='Настройки', default=dict, blank=True)
    diagnostics = models.JSONField(verbose_name='Диагностика', default=dict, blank=True)
    artifact = models.CharField(verbose_name='Файл результата', max_length=500, blank=True)
    manifest = models.CharField(verbose_name='Манифест', max_length=500, blank=True)
    wall_time = models.FloatField(verbose_name='Время счёта, с', blank=True, null=True)
    error = models.TextField(verbose_name='Ошибка', blank=True)
    created_at = models.DateTimeField(auto_now_add=True, verbose_name='Дата создания')

    class Meta:
        verbose_name = 'Запуск'
        verbose_name_plural = 'Запуски'
        ordering = ['-created_at']

    def __str__(self):
        return f'{self.command} #{self.pk} ({self.get_status_display()})'

    def finish(self, artifact, manifest, diagnostics, wall_time):
        self.status = 'done'
        self.artifact = str(artifact)
        self.manifest = str(manifest)
        self.diagnostics = diagnostics
        self.wall_time = wall_time
        self.save()

    def fail(self, error_line, wall_time):
        self.status = 'failed'
        self.error = error_line
        self.wall_time = wall_time
        self.save()
