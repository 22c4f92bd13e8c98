from django.contrib import admin

from .models import Run


@admin.register(Run)
class RunAdmin(admin.ModelAdmin):
    list_display = ('id', 'command', 'status', 'wall_time', 'created_at')
    list_filter = ('command', 'status')
    readonly_fields = ('spec', 'knobs', 'diagnostics', 'artifact', 'manifest', 'wall_time', 'error', 'created_at')
