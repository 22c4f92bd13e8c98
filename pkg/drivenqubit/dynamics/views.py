from drf_spectacular.utils import extend_schema
from rest_framework import generics, permissions, status
from rest_framework.response import Response
from rest_framework.views import APIView

from .exceptions import DynamicsError
from .gbf import build_gbf_table
from .kernel import KernelSpec
from .models import Run
from .propagator import Unitary2, quasienergies, unitary_grid_column
from .serializers import (
    GbfRequestSerializer,
    QuasienergyRequestSerializer,
    RunSerializer,
    drive_spec_from_data,
)
from .waveform import to_lab_frame


class RunListView(generics.ListAPIView):
    """Журнал запусков с фильтрацией по команде и статусу"""
    queryset = Run.objects.all()
    serializer_class = RunSerializer
    filterset_fields = ['command', 'status']
    permission_classes = [permissions.AllowAny]


class RunDetailView(generics.RetrieveAPIView):
    queryset = Run.objects.all()
    serializer_class = RunSerializer
    permission_classes = [permissions.AllowAny]


class GbfTableView(APIView):
    """Полоса усечения и коэффициенты J_l для переданного драйва"""
    permission_classes = [permissions.AllowAny]

    @extend_schema(request=GbfRequestSerializer)
    def post(self, request, *args, **kwargs):
        serializer = GbfRequestSerializer(data=request.data)
        serializer.is_valid(raise_exception=True)
        spec = drive_spec_from_data(serializer.validated_data['spec'])
        try:
            table = build_gbf_table(spec, serializer.validated_data['threshold'])
        except DynamicsError as error:
            return Response({'error': error.as_line()}, status=status.HTTP_400_BAD_REQUEST)
        return Response({
            'l_min': table.l_min,
            'l_max': table.l_max,
            'threshold': table.threshold,
            'rows': [{'l': l, 're': re, 'im': im, 'modulus': modulus}
                     for l, re, im, modulus in table.rows()],
        })


class QuasienergyView(APIView):
    """Квазиэнергии по оператору монодромии сеточного движка"""
    permission_classes = [permissions.AllowAny]

    @extend_schema(request=QuasienergyRequestSerializer)
    def post(self, request, *args, **kwargs):
        serializer = QuasienergyRequestSerializer(data=request.data)
        serializer.is_valid(raise_exception=True)
        data = serializer.validated_data
        spec = drive_spec_from_data(data['spec'])
        try:
            ks = KernelSpec.from_drive(spec)
            solution = unitary_grid_column(ks, 0.0, spec.period, data['grid'])
            monodromy = solution.at(-1)
            if data['frame'] == 'lab':
                monodromy = Unitary2.from_matrix(
                    to_lab_frame(monodromy.matrix, spec, spec.period, 0.0))
            eps_plus, eps_minus = quasienergies(monodromy, spec.period)
        except DynamicsError as error:
            return Response({'error': error.as_line()}, status=status.HTTP_400_BAD_REQUEST)
        return Response({
            'eps_plus': eps_plus,
            'eps_minus': eps_minus,
            'unitarity_defect': monodromy.unitarity_defect(),
            'frame': data['frame'],
        })
